import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymtree.cayley import (
    AbelianOracle,
    BallTooLarge,
    FiniteGroupOracle,
    FreeOracle,
    LiftError,
    RelPath,
    abelian_group,
    analyze_path,
    build_relative_ball,
    enumerate_ball,
    export_ball,
    first_geodesic,
    free_group,
    geodesics_between,
    lift_path,
    rel_path_from_steps,
    surface_group,
    validate_path,
    word_path,
    zz_free_product,
)
from asymtree.words import free_reduce, inverse

a, A, b, B = 1, -1, 2, -2


@pytest.fixture(scope="module")
def f2_5():
    ball = enumerate_ball(free_group(), 5)
    return ball, build_relative_ball(ball)


@pytest.mark.parametrize("oracle,sizes", [
    (free_group(), [5, 17, 53]),
    (abelian_group(), [5, 13, 25]),
    (zz_free_product(), [9, 57, 337]),
    (surface_group(), [9, 65, 457]),
])
def test_ball_sizes(oracle, sizes):
    assert [enumerate_ball(oracle, r).n for r in (1, 2, 3)] == sizes


def test_larger_ball_sizes():
    assert enumerate_ball(free_group(), 6).n == 1457
    assert enumerate_ball(abelian_group(), 6).n == 85


def test_ball_too_large():
    with pytest.raises(BallTooLarge):
        enumerate_ball(free_group(), 6, max_vertices=1000)


def test_s_distance_equals_word_length():
    for oracle in (free_group(), abelian_group()):
        ball = enumerate_ball(oracle, 4)
        d0 = ball.dist_from(0)
        assert all(d0[v] == len(w) for v, w in enumerate(ball.words))


def test_distances_against_networkx():
    ball = enumerate_ball(zz_free_product(), 2)
    G = nx.Graph()
    G.add_edges_from((u, v) for u, v, _ in ball.s_edges())
    ref = dict(nx.all_pairs_shortest_path_length(G))
    M = ball.dist_matrix()
    for u in range(ball.n):
        for v in range(ball.n):
            assert M[u, v] == ref[u][v]


def test_geodesics_examples():
    ball = enumerate_ball(abelian_group(), 2)
    paths, trunc = geodesics_between(ball, 0, ball.vertex((a, b)))
    assert len(paths) == 2 and not trunc
    paths, trunc = geodesics_between(ball, 0, ball.vertex((a, a)), cap=10)
    assert len(paths) == 1
    ball3 = enumerate_ball(abelian_group(), 4)
    paths, trunc = geodesics_between(ball3, 0, ball3.vertex((a, a, b, b)), cap=3)
    assert len(paths) == 3 and trunc
    paths, _ = geodesics_between(ball3, 0, ball3.vertex((a, a, b, b)))
    assert len(paths) == 6
    g = first_geodesic(ball3, 0, ball3.vertex((a, b)))
    assert g == paths_first(ball3, 0, ball3.vertex((a, b)))


def paths_first(ball, u, v):
    return geodesics_between(ball, u, v)[0][0]


def test_word_path():
    ball = enumerate_ball(free_group(), 3)
    p = word_path(ball, 0, (a, b, B))
    assert p[-1] == ball.vertex((a,))
    assert len(p) == 4


def test_relative_distance_examples(f2_5):
    ball, rel = f2_5
    assert rel.dist(0, ball.vertex((a, a, a))) == 1
    assert rel.dist(0, ball.vertex((b, a, a, a, B))) == 3
    assert rel.dist(0, ball.vertex((b,))) == 1


def test_relative_distance_at_most_s_distance(f2_5):
    ball, rel = f2_5
    rng = np.random.default_rng(0)
    for v in rng.integers(0, ball.n, 30):
        ds = ball.dist_from(int(v))
        dr = rel.dist_from(int(v))
        assert (dr <= ds).all()


def test_relative_distance_against_networkx():
    ball = enumerate_ball(abelian_group(), 3)
    rel = build_relative_ball(ball)
    G = nx.Graph()
    G.add_edges_from((u, v) for u, v, _ in ball.s_edges())
    G.add_edges_from((u, v) for u, v, _, _ in rel.h_edges())
    ref = dict(nx.all_pairs_shortest_path_length(G))
    M = rel.dist_matrix()
    for u, v in itertools.product(range(ball.n), repeat=2):
        assert M[u, v] == ref[u][v]


def test_cosets_partition():
    ball = enumerate_ball(zz_free_product(), 2)
    rel = build_relative_ball(ball)
    assert rel.m == 2
    for i in range(rel.m):
        members = np.concatenate(rel.members[i])
        assert sorted(members.tolist()) == list(range(ball.n))
    # the identity coset of the first factor is the Z^2 ball of radius 2
    assert len(rel.members[0][rel.coset_ids[0, 0]]) == 13


def test_analyze_and_lift(f2_5):
    ball, rel = f2_5
    t = ball.vertex((b, a, a, a))
    p = rel_path_from_steps(rel, 0, [b, ("H", 0, t), B])
    comps, back = analyze_path(p, rel)
    assert len(comps) == 1 and comps[0].has_h_edge and not back
    lifted = lift_path(p, rel)
    assert len(lifted) == 6
    assert lifted[-1] == ball.vertex((b, a, a, a, B))
    # a·b·b'·a revisits the coset of ⟨a⟩ after leaving it
    p2 = rel_path_from_steps(rel, 0, [a, b, B, a])
    comps, back = analyze_path(p2, rel)
    assert back and len(comps) == 2


def test_lift_single_h_edge():
    ball = enumerate_ball(free_group(), 3)
    rel = build_relative_ball(ball)
    t = ball.vertex((b, a, a))
    p = rel_path_from_steps(rel, ball.vertex((b,)), [("H", 0, t)])
    assert lift_path(p, rel) == (ball.vertex((b,)), ball.vertex((b, a)), t)
    # the empty path lifts to itself
    p = rel_path_from_steps(rel, ball.vertex((B, a, a)), [])
    assert lift_path(p, rel) == (p.start,)


def test_lift_error_when_geodesic_exits():
    ball = enumerate_ball(free_group(), 3)
    rel = build_relative_ball(ball)
    x, y = ball.vertex((b, b, a)), ball.vertex((b, b, A))
    p = rel_path_from_steps(rel, x, [("H", 0, y)])
    # b²a and b²a' are joined by a length-2 geodesic through b², which is inside;
    # the ball of radius 3 contains it, so lifting succeeds
    assert len(lift_path(p, rel)) == 3
    ball2 = enumerate_ball(free_group(), 2)
    rel2 = build_relative_ball(ball2)
    x, y = ball2.vertex((b, a)), ball2.vertex((b, A))
    p = RelPath([x, y], [("H", 0, int(rel2.coset_ids[0, x]))])
    validate_path(p, rel2)
    assert len(lift_path(p, rel2)) == 3
    # break the ball so the geodesic is missing
    ball2.nbr[ball2.vertex((b,)), :] = -1
    ball2._dist.clear()
    with pytest.raises(LiftError):
        lift_path(p, rel2)


def test_invalid_paths(f2_5):
    ball, rel = f2_5
    with pytest.raises(ValueError):
        rel_path_from_steps(rel, 0, [("H", 0, ball.vertex((b,)))])
    with pytest.raises(ValueError):
        validate_path(RelPath([0, ball.vertex((b,))], [("S", a)]), rel)


def test_export_format():
    ball = enumerate_ball(free_group(), 1)
    text = export_ball(ball, build_relative_ball(ball))
    lines = text.splitlines()
    assert lines[:2] == ["vertex 0 1", "vertex 1 a"]
    assert "sedge 0 1 a" in lines and "hedge 0 1 0 0" in lines
    assert sum(ln.startswith("sedge") for ln in lines) == 4
    assert sum(ln.startswith("hedge") for ln in lines) == 3


def test_finite_group_oracle():
    # S3 from a transposition and a 3-cycle
    oracle = FiniteGroupOracle("st", [(1, 0, 2), (1, 2, 0)], [frozenset({1})])
    ball = enumerate_ball(oracle, 5)
    assert ball.n == 6
    rel = build_relative_ball(ball)
    assert len(rel.members[0]) == 3


SURFACE = surface_group()
words4 = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=10).map(tuple)


@settings(max_examples=100)
@given(words4, words4)
def test_oracles_agree_with_normal_forms(u, v):
    F = FreeOracle("ab")
    assert F.equal(u, v) == (free_reduce(u) == free_reduce(v))
    Z = AbelianOracle("ab")
    assert Z.equal(u, v) == (np.array_equal(Z.vector(u), Z.vector(v)))
    assert Z.equal(Z.from_vector(Z.vector(u)), u)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2, 3, -3, 4, -4]), max_size=5).map(tuple))
def test_surface_normal_form_is_consistent(u):
    # normal forms are found by growing spheres, so words stay short here
    S = SURFACE
    assert S.equal(u + inverse(u), ())
    assert S.equal(S.normal_form(u), u)
