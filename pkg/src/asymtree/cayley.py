"""Cayley-graph balls, word-problem oracles, the relative graph and path analysis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .smallcancel import DehnReducer
from .words import Presentation, free_reduce, inverse, is_reduced, word_key

UNREACHED = np.int16(-1)


def letters_of(ngens: int) -> list:
    return [s * g for g in range(1, ngens + 1) for s in (1, -1)]


# ---------------------------------------------------------------------------
# oracles


class GroupOracle:
    """Decides the word problem through a canonical geodesic spelling."""

    def __init__(self, names: Sequence[str], parabolics: Sequence = ()):
        self.names = tuple(names)
        self.ngens = len(self.names)
        self.parabolics = tuple(frozenset(p) for p in parabolics)

    def normal_form(self, w) -> tuple:
        raise NotImplementedError

    def _sub_key(self, nf, sub):
        """Canonical key of the left coset nf·⟨sub⟩, or None if not supported."""
        return None

    def _in_sub(self, nf, sub) -> bool:
        return all(abs(x) in sub for x in nf)

    def in_parabolic(self, w, i: int) -> bool:
        return self._in_sub(self.normal_form(w), self.parabolics[i])

    def coset_key(self, w, i: int):
        return self._sub_key(self.normal_form(w), self.parabolics[i])

    def equal(self, u, v) -> bool:
        return self.normal_form(u) == self.normal_form(v)


class FreeOracle(GroupOracle):
    """Free group; parabolics are free factors spanned by generator subsets."""

    def normal_form(self, w):
        return free_reduce(w)

    def _sub_key(self, nf, sub):
        k = len(nf)
        while k and abs(nf[k - 1]) in sub:
            k -= 1
        return nf[:k]


class AbelianOracle(GroupOracle):
    """Free abelian group on the generators; normal form a^x b^y ... ."""

    def vector(self, w):
        v = [0] * self.ngens
        for x in w:
            v[abs(x) - 1] += 1 if x > 0 else -1
        return v

    def from_vector(self, v):
        out = []
        for g, e in enumerate(v, start=1):
            out.extend([g if e > 0 else -g] * abs(e))
        return tuple(out)

    def normal_form(self, w):
        return self.from_vector(self.vector(w))

    def _sub_key(self, nf, sub):
        v = self.vector(nf)
        return tuple(0 if g + 1 in sub else e for g, e in enumerate(v))

    def _in_sub(self, nf, sub):
        return all(abs(x) in sub for x in nf)


class FiniteGroupOracle(GroupOracle):
    """Finite group given by permutations of {0..m-1}, one per generator."""

    def __init__(self, names, perms, parabolics=()):
        super().__init__(names, parabolics)
        self.perms = [tuple(p) for p in perms]
        m = len(self.perms[0])
        inv = []
        for p in self.perms:
            q = [0] * m
            for i, j in enumerate(p):
                q[j] = i
            inv.append(tuple(q))
        self.inv = inv
        ident = tuple(range(m))
        self.spelling = {ident: ()}
        layer = [ident]
        while layer:
            nxt = []
            for e in layer:
                for x in letters_of(self.ngens):
                    f = self._act(e, x)
                    if f not in self.spelling:
                        self.spelling[f] = self.spelling[e] + (x,)
                        nxt.append(f)
            layer = nxt
        self._subgroups = {}

    def _act(self, e, x):
        p = self.perms[x - 1] if x > 0 else self.inv[-x - 1]
        return tuple(p[i] for i in e)

    def element(self, w):
        e = tuple(range(len(self.perms[0])))
        for x in w:
            e = self._act(e, x)
        return e

    def normal_form(self, w):
        return self.spelling[self.element(w)]

    def _subgroup(self, sub):
        if sub not in self._subgroups:
            ident = tuple(range(len(self.perms[0])))
            seen = {ident}
            stack = [ident]
            while stack:
                e = stack.pop()
                for g in sub:
                    for x in (g, -g):
                        f = self._act(e, x)
                        if f not in seen:
                            seen.add(f)
                            stack.append(f)
            self._subgroups[sub] = [self.spelling[h] for h in seen]
        return self._subgroups[sub]

    def _in_sub(self, nf, sub):
        return nf in set(self._subgroup(sub))

    def _sub_key(self, nf, sub):
        return min((self.normal_form(nf + h) for h in self._subgroup(sub)),
                   key=lambda w: (len(w), word_key(w)))


class FreeProductOracle(GroupOracle):
    """Free product of factor oracles over consecutive generator blocks."""

    def __init__(self, factors: Sequence[GroupOracle], parabolics=()):
        names = [nm for f in factors for nm in f.names]
        super().__init__(names, parabolics)
        self.factors = list(factors)
        self.offset = []
        self.owner = {}
        off = 0
        for k, f in enumerate(self.factors):
            self.offset.append(off)
            for g in range(1, f.ngens + 1):
                self.owner[off + g] = k
            off += f.ngens

    def _local(self, k, w):
        o = self.offset[k]
        return tuple(x - o if x > 0 else x + o for x in w)

    def _global(self, k, w):
        o = self.offset[k]
        return tuple(x + o if x > 0 else x - o for x in w)

    def syllables(self, w):
        """Reduced syllable sequence [(factor, local normal form), ...]."""
        out = []
        for x in w:
            k = self.owner[abs(x)]
            if out and out[-1][0] == k:
                merged = self.factors[k].normal_form(out[-1][1] + self._local(k, (x,)))
                if merged:
                    out[-1] = (k, merged)
                else:
                    out.pop()
            else:
                out.append((k, self._local(k, (x,))))
        return out

    def normal_form(self, w):
        return tuple(x for k, s in self.syllables(w) for x in self._global(k, s))

    def _factor_of(self, sub):
        ks = {self.owner[g] for g in sub}
        return ks.pop() if len(ks) == 1 else None

    def _in_sub(self, nf, sub):
        syl = self.syllables(nf)
        if not syl:
            return True
        k = self._factor_of(sub)
        if len(syl) != 1 or syl[0][0] != k:
            return False
        local = frozenset(g - self.offset[k] for g in sub)
        return self.factors[k]._in_sub(syl[0][1], local)

    def _sub_key(self, nf, sub):
        k = self._factor_of(sub)
        if k is None:
            return None
        syl = self.syllables(nf)
        local = frozenset(g - self.offset[k] for g in sub)
        if syl and syl[-1][0] == k:
            head = tuple(x for kk, s in syl[:-1] for x in self._global(kk, s))
            inner = self.factors[k]._sub_key(syl[-1][1], local)
            if inner is None:
                return None
            return head, inner
        head = tuple(x for kk, s in syl for x in self._global(kk, s))
        return head, self.factors[k]._sub_key((), local)


class DehnOracle(GroupOracle):
    """Word problem by Dehn's algorithm; normal forms are shortlex-least spellings
    found by growing a registry of group elements one sphere at a time."""

    def __init__(self, presentation: Presentation, parabolics=None):
        super().__init__(presentation.names,
                         presentation.parabolics if parabolics is None else parabolics)
        self.presentation = presentation
        self.reducer = DehnReducer(presentation.relators)
        rel_vecs = np.array([self._abel(r) for r in presentation.relators], dtype=float)
        if rel_vecs.size and np.linalg.matrix_rank(rel_vecs) > 0:
            _, s, vt = np.linalg.svd(rel_vecs)
            rank = int((s > 1e-9).sum())
            self._proj = vt[rank:].T
        else:
            self._proj = np.eye(self.ngens)
        self.buckets = {}
        self.layers = [[()]]
        self._register(())
        self.cache = {(): ()}

    def _abel(self, w):
        v = [0] * self.ngens
        for x in w:
            v[abs(x) - 1] += 1 if x > 0 else -1
        return v

    def _bucket(self, w):
        return tuple(np.round(np.asarray(self._abel(w), float) @ self._proj, 6) + 0.0)

    def _register(self, w):
        self.buckets.setdefault(self._bucket(w), []).append(w)

    def _lookup(self, w):
        for v in self.buckets.get(self._bucket(w), ()):
            if self.reducer.is_trivial(w + inverse(v)):
                return v
        return None

    def _grow(self):
        nxt = []
        for w in self.layers[-1]:
            for x in letters_of(self.ngens):
                if w and w[-1] == -x:
                    continue
                c = w + (x,)
                if self._lookup(c) is None:
                    self._register(c)
                    nxt.append(c)
        self.layers.append(nxt)

    def normal_form(self, w):
        r = self.reducer.reduce(w)
        hit = self.cache.get(r)
        if hit is not None:
            return hit
        while len(self.layers) <= len(r):
            self._grow()
        nf = self._lookup(r)
        self.cache[r] = nf
        return nf


# ---------------------------------------------------------------------------
# balls


class BallTooLarge(RuntimeError):
    pass


class BallGraph:
    """Radius-r ball of Cayley(G,S) with S the generators and their inverses.

    Vertex ids follow enumeration order (sphere by sphere, shortlex within a
    sphere). Distances are graph distances inside the ball.
    """

    def __init__(self, oracle: GroupOracle, radius: int, words, nbr):
        self.oracle = oracle
        self.radius = radius
        self.words = words
        self.index = {w: i for i, w in enumerate(words)}
        self.nbr = nbr
        self.letters = letters_of(oracle.ngens)
        self.col = {x: k for k, x in enumerate(self.letters)}
        self.n = len(words)
        self._dist = {}
        self._matrix = None
        self.sphere = np.array([len(w) for w in words], dtype=np.int16)

    @property
    def names(self):
        return self.oracle.names

    def vertex(self, w) -> int:
        nf = self.oracle.normal_form(w)
        if nf not in self.index:
            raise KeyError(f"word {w} is outside the ball of radius {self.radius}")
        return self.index[nf]

    def step(self, v: int, x: int) -> int:
        return int(self.nbr[v, self.col[x]])

    def s_edges(self):
        """Pairs (u, v, generator) with v = u·g for each positive generator g."""
        out = []
        for k, x in enumerate(self.letters):
            if x < 0:
                continue
            for u in range(self.n):
                v = int(self.nbr[u, k])
                if v >= 0:
                    out.append((u, v, x))
        return out

    def adjacency(self) -> csr_matrix:
        rows, cols = np.nonzero(self.nbr >= 0)
        data = np.ones(len(rows), dtype=np.int8)
        return csr_matrix((data, (rows, self.nbr[rows, cols])), shape=(self.n, self.n))

    def _bfs(self, sources, targets=None) -> np.ndarray:
        """Multi-source BFS; with ``targets`` it stops once all of them are reached."""
        dist = np.full(self.n, UNREACHED, dtype=np.int16)
        front = np.unique(np.asarray(sources, dtype=np.int64))
        dist[front] = 0
        d = 0
        while front.size:
            if targets is not None and (dist[targets] >= 0).all():
                break
            d += 1
            nb = self.nbr[front].ravel()
            nb = nb[nb >= 0]
            nb = np.unique(nb[dist[nb] < 0])
            dist[nb] = d
            front = nb
        return dist

    def dist_from(self, v: int) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[v]
        d = self._dist.get(v)
        if d is None:
            d = self._bfs([v])
            if len(self._dist) > 4096:
                self._dist.clear()
            self._dist[v] = d
        return d

    def distances_from(self, sources) -> np.ndarray:
        """Distance to the nearest of several sources."""
        return self._bfs(sources)

    def dist(self, u: int, v: int) -> int:
        return int(self.dist_from(u)[v])

    def dist_matrix(self) -> np.ndarray:
        if self._matrix is None:
            m = np.empty((self.n, self.n), dtype=np.int16)
            A = self.adjacency()
            chunk = max(1, 2_000_000 // max(self.n, 1))
            for s in range(0, self.n, chunk):
                idx = np.arange(s, min(self.n, s + chunk))
                m[idx] = shortest_path(A, unweighted=True, indices=idx).astype(np.int16)
            self._matrix = m
        return self._matrix


def enumerate_ball(oracle: GroupOracle, r: int, max_vertices: int = 2_000_000) -> BallGraph:
    if r < 0:
        raise ValueError("radius must be nonnegative")
    letters = letters_of(oracle.ngens)
    ident = oracle.normal_form(())
    words = [ident]
    index = {ident: 0}
    layer = [0]
    edges = []
    for _ in range(r):
        nxt = []
        for u in layer:
            w = words[u]
            for x in letters:
                nf = oracle.normal_form(w + (x,))
                v = index.get(nf)
                if v is None:
                    v = len(words)
                    index[nf] = v
                    words.append(nf)
                    nxt.append(v)
                    if len(words) > max_vertices:
                        raise BallTooLarge(f"ball exceeds {max_vertices} vertices "
                                           f"(reached {len(words)})")
        layer = nxt
    n = len(words)
    nbr = np.full((n, len(letters)), -1, dtype=np.int64)
    for u, w in enumerate(words):
        for k, x in enumerate(letters):
            v = index.get(oracle.normal_form(w + (x,)))
            if v is not None:
                nbr[u, k] = v
    return BallGraph(oracle, r, words, nbr)


def geodesics_between(ball: BallGraph, u: int, v: int, cap: int = 10**4):
    """All geodesics from u to v inside the ball, as vertex tuples, in letter order.

    Returns ``(paths, truncated)``.
    """
    if not (0 <= u < ball.n and 0 <= v < ball.n):
        raise IndexError("endpoint outside the ball")
    dv = ball.dist_from(v)
    if dv[u] < 0:
        return [], False
    paths = []
    truncated = False
    stack = [(u, (u,))]
    while stack:
        x, path = stack.pop()
        if x == v:
            paths.append(path)
            if len(paths) >= cap:
                truncated = bool(stack)
                break
            continue
        want = dv[x] - 1
        nxt = [int(y) for y in ball.nbr[x] if y >= 0 and dv[y] == want]
        for y in reversed(nxt):
            stack.append((y, path + (y,)))
    return paths, truncated


def first_geodesic(ball: BallGraph, u: int, v: int):
    dv = ball.dist_from(v)
    if dv[u] < 0:
        return None
    path = [u]
    x = u
    while x != v:
        want = dv[x] - 1
        for y in ball.nbr[x]:
            if y >= 0 and dv[y] == want:
                x = int(y)
                break
        path.append(x)
    return tuple(path)


def word_path(ball: BallGraph, start: int, w) -> tuple:
    """Vertices visited by spelling w from ``start``; errors if it leaves the ball."""
    path = [start]
    x = start
    for a in w:
        x = ball.step(x, a)
        if x < 0:
            raise ValueError(f"path spelled by {w} leaves the ball")
        path.append(x)
    return tuple(path)


# ---------------------------------------------------------------------------
# relative graph


class RelBallGraph:
    """The ball with an extra edge between any two vertices of one left coset gH_i.

    Coset ids are certified within the ball only: two ball vertices share an id
    iff the oracle says u⁻¹v ∈ H_i.
    """

    def __init__(self, base: BallGraph, coset_ids: np.ndarray):
        self.base = base
        self.oracle = base.oracle
        self.n = base.n
        self.coset_ids = coset_ids  # shape (m, n)
        self.m = coset_ids.shape[0]
        self.members = []
        for i in range(self.m):
            order = np.argsort(coset_ids[i], kind="stable")
            counts = np.bincount(coset_ids[i])
            splits = np.cumsum(counts)[:-1]
            self.members.append(np.split(order, splits))
        self._dist = {}
        self._matrix = None

    @property
    def radius(self):
        return self.base.radius

    def same_coset(self, u: int, v: int):
        """Parabolic indices i with u, v in one coset of H_i."""
        return [i for i in range(self.m) if self.coset_ids[i, u] == self.coset_ids[i, v]]

    def cosets(self, min_size: int = 1):
        """All (i, coset id, member array) with at least ``min_size`` members."""
        out = []
        for i in range(self.m):
            for c, mem in enumerate(self.members[i]):
                if len(mem) >= min_size:
                    out.append((i, c, mem))
        return out

    def h_edges(self):
        out = []
        for i in range(self.m):
            for c, mem in enumerate(self.members[i]):
                mem = sorted(int(x) for x in mem)
                for a in range(len(mem)):
                    for b in range(a + 1, len(mem)):
                        out.append((mem[a], mem[b], i, c))
        return out

    def _bfs(self, sources) -> np.ndarray:
        n = self.n
        dist = np.full(n, UNREACHED, dtype=np.int16)
        front = np.unique(np.asarray(sources, dtype=np.int64))
        dist[front] = 0
        used = [np.zeros(len(self.members[i]), dtype=bool) for i in range(self.m)]
        d = 0
        while front.size:
            d += 1
            parts = [self.base.nbr[front].ravel()]
            for i in range(self.m):
                cs = np.unique(self.coset_ids[i, front])
                cs = cs[~used[i][cs]]
                used[i][cs] = True
                if cs.size:
                    parts.append(np.concatenate([self.members[i][c] for c in cs]))
            nb = np.concatenate(parts)
            nb = nb[nb >= 0]
            nb = np.unique(nb[dist[nb] < 0])
            dist[nb] = d
            front = nb
        return dist

    def dist_from(self, v: int) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[v]
        d = self._dist.get(v)
        if d is None:
            d = self._bfs([v])
            if len(self._dist) > 4096:
                self._dist.clear()
            self._dist[v] = d
        return d

    def dist(self, u: int, v: int) -> int:
        return int(self.dist_from(u)[v])

    def dist_matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.stack([self._bfs([v]) for v in range(self.n)])
        return self._matrix


def build_relative_ball(ball: BallGraph, oracle: GroupOracle = None) -> RelBallGraph:
    oracle = oracle or ball.oracle
    m = len(oracle.parabolics)
    ids = np.zeros((m, ball.n), dtype=np.int64)
    for i in range(m):
        keys = {}
        reps = []
        for v, w in enumerate(ball.words):
            k = oracle.coset_key(w, i)
            if k is None:
                # no canonical key: compare against earlier coset representatives
                found = -1
                wi = inverse(w)
                for c, rep in enumerate(reps):
                    if oracle.in_parabolic(wi + rep, i):
                        found = c
                        break
                if found < 0:
                    found = len(reps)
                    reps.append(w)
                ids[i, v] = found
            else:
                if k not in keys:
                    keys[k] = len(keys)
                ids[i, v] = keys[k]
    return RelBallGraph(ball, ids)


# ---------------------------------------------------------------------------
# relative paths


@dataclass
class RelPath:
    """Vertex ids plus one tag per edge: ("S", letter) or ("H", parabolic, coset)."""

    vertices: list
    edges: list = field(default_factory=list)

    def __len__(self):
        return len(self.edges)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]


def rel_path_from_steps(rel: RelBallGraph, start: int, steps) -> RelPath:
    """Build a path from steps: a signed letter for an S-edge, or ("H", i, target)."""
    verts = [start]
    edges = []
    x = start
    for s in steps:
        if isinstance(s, tuple):
            _, i, y = s
            if rel.coset_ids[i, x] != rel.coset_ids[i, y] or x == y:
                raise ValueError(f"no H-edge between {x} and {y} for parabolic {i}")
            edges.append(("H", i, int(rel.coset_ids[i, x])))
            x = y
        else:
            y = rel.base.step(x, s)
            if y < 0:
                raise ValueError("path leaves the ball")
            edges.append(("S", s))
            x = y
        verts.append(x)
    return RelPath(verts, edges)


def validate_path(p: RelPath, rel: RelBallGraph):
    if len(p.vertices) != len(p.edges) + 1:
        raise ValueError("vertex/edge count mismatch")
    for k, e in enumerate(p.edges):
        x, y = p.vertices[k], p.vertices[k + 1]
        if e[0] == "S":
            if rel.base.step(x, e[1]) != y:
                raise ValueError(f"edge {k} is not the S-edge {e[1]}")
        else:
            _, i, c = e
            if x == y or rel.coset_ids[i, x] != c or rel.coset_ids[i, y] != c:
                raise ValueError(f"edge {k} is not an H-edge in coset {c} of parabolic {i}")


@dataclass(frozen=True)
class Component:
    parabolic: int
    coset: int
    first: int  # index of first edge
    last: int  # index of last edge (inclusive)
    has_h_edge: bool

    def endpoints(self, p: RelPath):
        return p.vertices[self.first], p.vertices[self.last + 1]


def analyze_path(p: RelPath, rel: RelBallGraph):
    """H-components of p and whether p backtracks.

    A component is a maximal run of at least one edge whose vertices all lie in
    one left coset of some H_i. Backtracking means two distinct components share
    a coset.
    """
    comps = []
    ne = len(p.edges)
    for i in range(rel.m):
        ids = rel.coset_ids[i, p.vertices]
        k = 0
        while k < ne:
            if ids[k] != ids[k + 1]:
                k += 1
                continue
            j = k
            while j + 1 < ne and ids[j + 1] == ids[j + 2] and ids[j + 1] == ids[k]:
                j += 1
            has_h = any(p.edges[t] is not None and p.edges[t][0] == "H" for t in range(k, j + 1))
            comps.append(Component(i, int(ids[k]), k, j, has_h))
            k = j + 1
    comps.sort(key=lambda c: (c.first, c.parabolic))
    seen = set()
    backtracking = False
    for c in comps:
        key = (c.parabolic, c.coset)
        if key in seen:
            backtracking = True
        seen.add(key)
    return comps, backtracking


class LiftError(ValueError):
    pass


def lift_path(p: RelPath, rel: RelBallGraph) -> tuple:
    """Replace each component containing an H-edge by the first ball geodesic
    between its endpoints; other edges are kept."""
    comps, _ = analyze_path(p, rel)
    ball = rel.base
    replace = {}
    for c in comps:
        if not c.has_h_edge:
            continue
        # overlapping components of different parabolics: keep the first found
        if any(c.first <= t <= c.last for t in replace):
            continue
        u, v = c.endpoints(p)
        d = ball.dist(u, v)
        true_len = len(rel.oracle.normal_form(inverse(ball.words[u]) + ball.words[v]))
        if d < 0 or d > true_len:
            raise LiftError(f"geodesic for edges {c.first}..{c.last} ({u} to {v}) exits the ball")
        replace[c.first] = (c.last, first_geodesic(ball, u, v))
    # H-edges outside any recorded component cannot occur: every H-edge is a run
    out = [p.vertices[0]]
    k = 0
    while k < len(p.edges):
        if k in replace:
            last, geo = replace[k]
            out.extend(geo[1:])
            k = last + 1
        else:
            if p.edges[k][0] != "S":
                raise LiftError(f"H-edge {k} not covered by a component")
            out.append(p.vertices[k + 1])
            k += 1
    return tuple(out)


def export_ball(ball: BallGraph, rel: RelBallGraph = None) -> str:
    from .words import format_word
    lines = [f"vertex {i} {format_word(w, ball.names)}" for i, w in enumerate(ball.words)]
    for u, v, g in ball.s_edges():
        lines.append(f"sedge {u} {v} {ball.names[g - 1]}")
    if rel is not None:
        for u, v, i, c in rel.h_edges():
            lines.append(f"hedge {u} {v} {i} {c}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# built-in groups


def free_group(ngens=2, parabolics=((1,),)):
    names = "abcdefgh"[:ngens]
    return FreeOracle(names, [frozenset(p) for p in parabolics])


def abelian_group(ngens=2, parabolics=((1,),)):
    names = "abcdefgh"[:ngens]
    return AbelianOracle(names, [frozenset(p) for p in parabolics])


def zz_free_product():
    f1 = AbelianOracle("ab")
    f2 = AbelianOracle("cd")
    return FreeProductOracle([f1, f2], [frozenset({1, 2}), frozenset({3, 4})])


def surface_group(genus=2):
    from .words import commutator
    names = "abcdefgh"[:2 * genus]
    rel = ()
    for k in range(genus):
        rel += commutator((2 * k + 1,), (2 * k + 2,))
    return DehnOracle(Presentation(tuple(names), (rel,)))
