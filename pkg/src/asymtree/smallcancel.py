"""Pieces, the C'(λ) and C*(λ) conditions, C*-word generation and Dehn's algorithm."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .words import (
    WordSet,
    close_word_set,
    cyclic_normalize,
    cyclic_reduce,
    free_reduce,
    inverse,
    orbit,
    rotations,
    word_key,
)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x).limit_denominator(10**9)


def _lcp(u, v) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def longest_repeat(w: Sequence[int]) -> int:
    """Length of the longest subword occurring at two different positions of ``w``."""
    n = len(w)
    if n < 2:
        return 0
    suffixes = sorted(range(n), key=lambda i: word_key(w[i:]))
    return max(_lcp(w[a:], w[b:]) for a, b in zip(suffixes, suffixes[1:]))


# ---------------------------------------------------------------------------
# C'(λ)


@dataclass
class PieceReport:
    relators: list
    table: dict  # (i, j) -> longest piece shared by orbits of relators i and j
    max_piece: list  # per relator
    lambda_measured: Fraction

    def to_dict(self, names=None):
        return {
            "lambda_measured": float(self.lambda_measured),
            "lambda_measured_exact": str(self.lambda_measured),
            "max_piece": list(self.max_piece),
            "relator_lengths": [len(r) for r in self.relators],
            "table": [[i, j, v] for (i, j), v in sorted(self.table.items())],
        }


def _orbit_members(relators):
    """Closed-set members tagged with the index of the relator they come from."""
    members, owner = [], []
    seen = set()
    for k, r in enumerate(relators):
        for m in sorted(orbit(r), key=word_key):
            if m in seen:
                continue
            seen.add(m)
            members.append(m)
            owner.append(k)
    return members, owner


def piece_report(relators: Iterable) -> PieceReport:
    rels = []
    for r in (relators.words if isinstance(relators, WordSet) else relators):
        c = cyclic_reduce(r)
        if not c:
            raise ValueError("empty relator")
        rels.append(c)
    # one relator per rotation/inversion orbit
    canon = {}
    for r in rels:
        key = min(cyclic_normalize(r), cyclic_normalize(inverse(r)), key=word_key)
        canon.setdefault(key, r)
    rels = sorted(canon, key=lambda w: (len(w), word_key(w)))
    if not rels:
        raise ValueError("empty relator set")
    members, owner = _orbit_members(rels)
    order = sorted(range(len(members)), key=lambda i: word_key(members[i]))
    lcps = [_lcp(members[a], members[b]) for a, b in zip(order, order[1:])]
    k = len(rels)
    table = {}
    # for each orbit j, sweep the sorted order keeping the lcp to the nearest j-member
    for j in range(k):
        for direction in (1, -1):
            idx = range(len(order)) if direction == 1 else range(len(order) - 1, -1, -1)
            cur = -1
            for pos in idx:
                if cur >= 0:
                    gap = lcps[pos - 1] if direction == 1 else lcps[pos]
                    cur = min(cur, gap)
                    o = owner[order[pos]]
                    if cur > table.get((o, j), 0):
                        table[(o, j)] = cur
                        table[(j, o)] = cur
                if owner[order[pos]] == j:
                    cur = 10**9
    for i in range(k):
        for j in range(k):
            table.setdefault((i, j), 0)
    for i, r in enumerate(rels):
        rep = max(longest_repeat(m) for m in rotations(r))
        table[(i, i)] = max(table[(i, i)], rep)
    max_piece = [max(table[(i, j)] for j in range(k)) for i in range(k)]
    lam = max(Fraction(max_piece[i], len(rels[i])) for i in range(k))
    return PieceReport(rels, table, max_piece, lam)


def check_c_prime(relators, lam) -> tuple:
    """Return ``(ok, report)``; ok iff every piece is shorter than λ·|r| for its relators."""
    lam = _frac(lam)
    rep = piece_report(relators)
    ok = all(rep.max_piece[i] < lam * len(r) for i, r in enumerate(rep.relators))
    return ok, rep


def naive_piece_lengths(relators) -> list:
    """Brute force: per relator, the longest piece found by enumerating subwords."""
    rels = [cyclic_reduce(r) for r in relators]
    members, owner = _orbit_members(rels)
    best = [0] * len(rels)
    for a in range(len(members)):
        for b in range(len(members)):
            if a == b:
                continue
            u, v = members[a], members[b]
            L = 0
            while L < min(len(u), len(v)) and u[L] == v[L]:
                L += 1
            for o in (owner[a], owner[b]):
                best[o] = max(best[o], L)
    for i in range(len(rels)):
        for m in orbit(rels[i]):
            n = len(m)
            for L in range(n - 1, 0, -1):
                subs = [m[s:s + L] for s in range(n - L + 1)]
                if len(set(subs)) < len(subs):
                    best[i] = max(best[i], L)
                    break
    return best


# ---------------------------------------------------------------------------
# C*(λ)


@dataclass
class CStarWitness:
    condition: int
    subword: tuple
    hosts: tuple


class _Trie:
    """Prefix trie over closed-set members; each node stores the shortest member below it."""

    def __init__(self):
        self.root = {}

    def violation(self, w, lam):
        """First depth L where an inserted member shares a length-L prefix with ``w``
        and L > λ·min(|w|, |member|); returns (L, member) or None."""
        node = self.root
        for d, x in enumerate(w):
            node = node.get(x)
            if node is None:
                return None
            L = d + 1
            if L > lam * min(len(w), node["#"][0]):
                return L, node["#"][1]
        return None

    def max_ratio(self, w):
        """Max over depths L of L / min(|w|, shortest member through the node)."""
        node = self.root
        best = Fraction(0)
        for d, x in enumerate(w):
            node = node.get(x)
            if node is None:
                break
            r = Fraction(d + 1, min(len(w), node["#"][0]))
            if r > best:
                best = r
        return best

    def insert(self, w):
        node = self.root
        for x in w:
            nxt = node.get(x)
            if nxt is None:
                nxt = node[x] = {"#": (len(w), w)}
            elif len(w) < nxt["#"][0]:
                nxt["#"] = (len(w), w)
            node = nxt


def _once_violation(w, lam):
    """Condition (1): a subword of length ≥ λ|w| occurring twice in ``w``."""
    m = max(1, math.ceil(lam * len(w)))
    if m > len(w):
        return None
    seen = set()
    for s in range(len(w) - m + 1):
        u = w[s:s + m]
        if u in seen:
            return u
        seen.add(u)
    return None


def check_cstar(W, lam) -> tuple:
    """Return ``(ok, witness)`` for C*(λ) on a closed word set.

    A piece is a common prefix of two distinct members of W. Since W is closed
    under rotation, this covers every common subword taken at positions where
    the two words are not the same cyclic word read from the same place.
    """
    lam = _frac(lam)
    words = sorted(W.words if isinstance(W, WordSet) else W, key=lambda w: (len(w), word_key(w)))
    for w in words:
        u = _once_violation(w, lam)
        if u is not None:
            return False, CStarWitness(1, u, (w, w))
    trie = _Trie()
    for w in words:
        v = trie.violation(w, lam)
        if v is not None:
            L, other = v
            return False, CStarWitness(2, w[:L], (w, other))
        trie.insert(w)
    return True, None


def naive_cstar(W, lam) -> bool:
    """Quadratic scan over all subword occurrences of all pairs of members."""
    lam = _frac(lam)
    words = list(W.words if isinstance(W, WordSet) else W)
    for w in words:
        n = len(w)
        for L in range(1, n + 1):
            if L < lam * n:
                continue
            subs = [w[s:s + L] for s in range(n - L + 1)]
            if len(set(subs)) < len(subs):
                return False
    for a in range(len(words)):
        for b in range(len(words)):
            w1, w2 = words[a], words[b]
            for i in range(len(w1)):
                r1 = w1[i:] + w1[:i]
                for j in range(len(w2)):
                    r2 = w2[j:] + w2[:j]
                    if r1 == r2:
                        continue
                    L = 0
                    while i + L < len(w1) and j + L < len(w2) and w1[i + L] == w2[j + L]:
                        L += 1
                    if L > lam * min(len(w1), len(w2)):
                        return False
    return True


@dataclass
class CStarProfile:
    lambda_n: dict = field(default_factory=dict)
    kappa_n: dict = field(default_factory=dict)

    def rows(self):
        return [(n, self.lambda_n[n], self.kappa_n.get(n, 0)) for n in sorted(self.lambda_n)]


def cstar_profile(W) -> CStarProfile:
    """For each word length n present, the infimal λ with C*(λ) on {w : |w| ≥ n}.

    Condition (1) is strict, so the sub-family satisfies C*(λ) for every
    λ > lambda_n; condition (2) also holds at λ = lambda_n.
    """
    words = sorted(W.words if isinstance(W, WordSet) else W, key=lambda w: (-len(w), word_key(w)))
    prof = CStarProfile()
    trie = _Trie()
    cur = Fraction(0)
    i = 0
    while i < len(words):
        n = len(words[i])
        j = i
        while j < len(words) and len(words[j]) == n:
            w = words[j]
            cur = max(cur, Fraction(longest_repeat(w), n), trie.max_ratio(w))
            trie.insert(w)
            j += 1
        prof.lambda_n[n] = cur
        prof.kappa_n[n] = j - i
        i = j
    return prof


@dataclass
class GenerationResult:
    words: WordSet
    representatives: dict  # length -> list of orbit representatives
    shortfall: dict  # length -> missing orbit count

    @property
    def complete(self) -> bool:
        return not self.shortfall


def generate_cstar_words(lam, lengths, per_length, seed=0, gens=2, max_tries=2000) -> GenerationResult:
    """Rejection-sample orbits of cyclically reduced words, screening each
    candidate against everything accepted so far; the final set is re-verified."""
    lam = _frac(lam)
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if any(L <= 0 for L in lengths):
        raise ValueError("lengths must be positive")
    rng = random.Random(seed)
    letters = [s * g for g in range(1, gens + 1) for s in (1, -1)]
    trie = _Trie()
    accepted = set()
    reps, shortfall = {}, {}
    for L in lengths:
        got = []
        tries = 0
        while len(got) < per_length and tries < max_tries:
            tries += 1
            w = [rng.choice(letters)]
            while len(w) < L:
                x = rng.choice(letters)
                if x != -w[-1] and (len(w) < L - 1 or x != -w[0]):
                    w.append(x)
            w = tuple(w)
            if len(w) > 1 and w[0] == -w[-1]:
                continue
            if _once_violation(w, lam) is not None:
                continue
            members = sorted(orbit(w), key=word_key)
            if any(m in accepted for m in members):
                continue
            if any(trie.violation(m, lam) is not None for m in members):
                continue
            own = _Trie()
            ok = True
            for m in members:
                if own.violation(m, lam) is not None:
                    ok = False
                    break
                own.insert(m)
            if not ok:
                continue
            for m in members:
                trie.insert(m)
            accepted.update(members)
            got.append(w)
        reps[L] = got
        if len(got) < per_length:
            shortfall[L] = per_length - len(got)
    out = WordSet(frozenset(accepted), closed=True)
    ok, wit = check_cstar(out, lam)
    if not ok:
        raise AssertionError(f"generated set failed re-verification: {wit}")
    return GenerationResult(out, reps, shortfall)


# ---------------------------------------------------------------------------
# Dehn's algorithm


class PreconditionError(ValueError):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class DehnReducer:
    """Dehn's algorithm for a presentation satisfying C'(1/6)."""

    def __init__(self, relators, check=True):
        rels = [cyclic_reduce(r) for r in relators]
        if check:
            ok, rep = check_c_prime(rels, Fraction(1, 6))
            if not ok:
                raise PreconditionError(
                    f"relators fail C'(1/6): measured lambda {rep.lambda_measured}", rep)
        self.rules = {}
        self.lengths = set()
        for r in rels:
            for m in orbit(r):
                n = len(m)
                for L in range(n // 2 + 1, n + 1):
                    u = m[:L]
                    v = inverse(m[L:])
                    old = self.rules.get(u)
                    if old is None or len(v) < len(old):
                        self.rules[u] = v
                    self.lengths.add(L)
        self.lengths = sorted(self.lengths)
        self.min_len = self.lengths[0] if self.lengths else 0

    def step(self, w):
        """One rewrite, or None if no subword is more than half of a relator."""
        n = len(w)
        rules = self.rules
        for i in range(n - self.min_len + 1):
            for L in self.lengths:
                if i + L > n:
                    break
                v = rules.get(w[i:i + L])
                if v is not None:
                    return free_reduce(w[:i] + v + w[i + L:])
        return None

    def reduce(self, w):
        w = free_reduce(w)
        while True:
            nxt = self.step(w)
            if nxt is None:
                return w
            w = nxt

    def is_trivial(self, w) -> bool:
        return not self.reduce(w)


@lru_cache(maxsize=32)
def _reducer(relators: frozenset) -> DehnReducer:
    return DehnReducer(sorted(relators, key=word_key))


def dehn_reduce(w, relators):
    rels = relators.words if isinstance(relators, WordSet) else relators
    return _reducer(frozenset(cyclic_reduce(r) for r in rels)).reduce(w)


# ---------------------------------------------------------------------------
# brute-force triviality


def reduced_words(gens: int, max_len: int):
    """All freely reduced words of length ≤ max_len, by length then key order."""
    letters = [s * g for g in range(1, gens + 1) for s in (1, -1)]
    layer = [()]
    yield ()
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for x in letters:
                if not w or w[-1] != -x:
                    nxt.append(w + (x,))
        yield from nxt
        layer = nxt


def _products(P, C, bound):
    """Free reductions of p·c (p in P, c in C) with length ≤ bound.

    Each product is found through the split of p and c at the cancelled
    segment, using an index of C keyed by prefix.
    """
    idx = {}
    for c in C:
        for k in range(max(0, len(c) - bound), len(c) + 1):
            idx.setdefault(c[:k], []).append(c[k:])
    out = set()
    for p in P:
        for k in range(max(0, len(p) - bound), len(p) + 1):
            tails = idx.get(inverse(p[k:]))
            if not tails:
                continue
            z = p[:k]
            for y in tails:
                if len(z) + len(y) <= bound:
                    w = free_reduce(z + y)
                    out.add(w)
    return out


def trivial_words_bruteforce(relators, gens: int, max_len: int, conj_len: int, factors: int = 2) -> set:
    """Reduced words of length ≤ max_len equal in the free group to a product of at
    most ``factors`` conjugates u·r·u⁻¹ with r in the closed relator set and
    |u| ≤ conj_len. Intermediate products longer than max_len plus the longest
    conjugate are discarded."""
    closed = close_word_set([cyclic_reduce(r) for r in relators]).words
    conj = set()
    for u in reduced_words(gens, conj_len):
        ui = inverse(u)
        for r in closed:
            conj.add(free_reduce(u + r + ui))
    longest = max((len(c) for c in conj), default=0)
    found = {()}
    layer = {()}
    for k in range(1, factors + 1):
        bound = max_len if k == factors else max_len + longest
        layer = _products(layer, conj, bound)
        found |= {w for w in layer if len(w) <= max_len}
    return found
