import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymtree.words import (
    Presentation,
    PresentationSyntaxError,
    WordSet,
    close_word_set,
    commutator,
    cyclic_normalize,
    cyclic_reduce,
    format_presentation,
    format_word,
    free_reduce,
    inverse,
    is_cyclically_reduced,
    is_reduced,
    least_rotation_index,
    orbit,
    parse_presentation,
    parse_word,
    read_word_set,
    rotations,
    word_key,
    write_word_set,
)

a, A, b, B = 1, -1, 2, -2

letters2 = st.sampled_from([1, -1, 2, -2])
letters4 = st.sampled_from([1, -1, 2, -2, 3, -3, 4, -4])
words2 = st.lists(letters2, max_size=12).map(tuple)
reduced2 = words2.map(free_reduce)


def test_free_reduce_examples():
    assert free_reduce((a, A, b)) == (b,)
    assert free_reduce(()) == ()
    assert free_reduce((a, b, B, A)) == ()


def test_cyclic_normalize_examples():
    assert cyclic_normalize((b, a, B)) == (a,)
    assert cyclic_normalize((b, a)) == (a, b)
    assert cyclic_normalize((a, b, a, b)) == (a, b, a, b)


def test_letter_order():
    # a < a' < b < b'
    assert sorted([(B,), (b,), (A,), (a,)], key=word_key) == [(a,), (A,), (b,), (B,)]


def test_close_word_set_examples():
    assert close_word_set(WordSet(frozenset({(a, b)}))).words == {(a, b), (b, a), (B, A), (A, B)}
    assert close_word_set([(a,)]).words == {(a,), (A,)}
    W = close_word_set([])
    assert W.words == frozenset() and W.closed


@given(words2)
def test_free_reduce_properties(w):
    r = free_reduce(w)
    assert is_reduced(r)
    assert len(r) <= len(w)
    assert free_reduce(r) == r
    assert free_reduce(w + inverse(w)) == ()


@given(reduced2)
def test_cyclic_normalize_rotation_invariant(w):
    c = cyclic_normalize(w)
    assert is_cyclically_reduced(c)
    cr = cyclic_reduce(w)
    for rot in rotations(cr):
        assert cyclic_normalize(rot) == c
    if cr:
        assert c == min(rotations(cr), key=word_key)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=15))
def test_booth_matches_brute_force(keys):
    k = least_rotation_index(keys)
    rots = [keys[i:] + keys[:i] for i in range(len(keys))]
    assert keys[k:] + keys[:k] == min(rots)


@given(st.lists(reduced2, max_size=5))
def test_close_word_set_idempotent_and_orbit_sized(ws):
    ws = [cyclic_reduce(w) for w in ws if cyclic_reduce(w)]
    W = close_word_set(ws)
    assert close_word_set(W).words == W.words
    for w in W.words:
        assert inverse(w) in W.words
        assert set(rotations(w)) <= W.words
    # the set is a disjoint union of orbits
    seen = set()
    for w in W:
        if w not in seen:
            seen |= orbit(w)
    assert seen == set(W.words)


def test_parse_presentation_examples():
    P = parse_presentation("gens a,b; rel [a,b]; par {a}")
    assert P.names == ("a", "b")
    assert P.relators == ((a, b, A, B),)
    assert P.parabolics == (frozenset({1}),)
    with pytest.raises(PresentationSyntaxError):
        parse_presentation("gens a,b; rel ;")
    P = parse_presentation("gens a,b,c,d; rel [a,b],[c,d]; par {a,b},{c,d}")
    assert len(P.relators) == 2 and len(P.parabolics) == 2


def test_parse_errors():
    with pytest.raises(PresentationSyntaxError) as e:
        parse_presentation("gens a,b; rel a c")
    assert e.value.pos > 0
    with pytest.raises(PresentationSyntaxError):
        parse_presentation("gens a,b; rel a a'")
    with pytest.raises(PresentationSyntaxError):
        parse_presentation("gens a,b; par {a},{a}")
    with pytest.raises(PresentationSyntaxError):
        parse_presentation("gens a,a")


def test_parse_word_syntax():
    names = ["a", "b"]
    assert parse_word("a^3", names) == (a, a, a)
    assert parse_word("a^-2", names) == (A, A)
    assert parse_word("(ab)'", names) == (B, A)
    assert parse_word("[a,b]", names) == commutator((a,), (b,))
    assert parse_word("1", names) == ()
    assert parse_word("a a'", names) == ()


def test_relators_stored_cyclically_reduced():
    P = parse_presentation("gens a,b; rel b a b'")
    assert P.relators == ((a,),)


def test_presentation_validation():
    with pytest.raises(ValueError):
        Presentation(("a",), ((2,),))
    with pytest.raises(ValueError):
        Presentation(("a", "b"), (), (frozenset({3}),))


@settings(max_examples=60)
@given(st.lists(st.lists(letters4, min_size=1, max_size=10).map(tuple), max_size=3),
       st.lists(st.sets(st.integers(1, 4), min_size=1, max_size=2), max_size=2))
def test_presentation_round_trip(rels, pars):
    rels = tuple(r for r in (cyclic_reduce(r) for r in rels) if r)
    pars = tuple(dict.fromkeys(frozenset(p) for p in pars))
    P = Presentation(("a", "b", "c", "d"), rels, pars)
    text = format_presentation(P)
    Q = parse_presentation(text)
    assert Q == P
    assert format_presentation(Q) == text


def test_long_names_round_trip():
    P = parse_presentation("gens x1,x2; rel x1 x2 x1' x2'")
    assert P.relators == ((1, 2, -1, -2),)
    assert parse_presentation(format_presentation(P)) == P


@given(st.lists(reduced2, max_size=6))
def test_word_set_text_round_trip(ws):
    W = WordSet(frozenset(w for w in ws))
    text = write_word_set(W, ["a", "b"])
    assert read_word_set(text, ["a", "b"]).words == W.words


def test_format_word():
    assert format_word((a, a, B), ["a", "b"]) == "a^2b'"
    assert format_word((), ["a", "b"]) == "1"
