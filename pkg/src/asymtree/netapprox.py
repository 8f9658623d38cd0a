"""Separated nets in sampled metric spaces, their Γ_κ graphs, and the
construction of two-generator presentations from graphs labelled by C* words."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .smallcancel import check_cstar, cstar_profile, generate_cstar_words, piece_report
from .words import Presentation, WordSet, cyclic_normalize, cyclic_reduce, free_reduce, inverse, word_key

TOL = 1e-9
CHUNK = 1024


class NetError(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


# ---------------------------------------------------------------------------
# metric samples


class MetricSample:
    """A finite metric space given by a distance function on indexed points."""

    def __init__(self, points, dist, basepoint: int = 0):
        self.points = list(points)
        self._dist = dist
        self.basepoint = basepoint
        self.n = len(self.points)

    def dist(self, i: int, j: int) -> float:
        return float(self.matrix([i], [j])[0, 0])

    def matrix(self, rows, cols) -> np.ndarray:
        return np.array([[self._dist(self.points[i], self.points[j]) for j in cols] for i in rows], dtype=float)

    def radius_from_base(self) -> np.ndarray:
        return self.matrix([self.basepoint], range(self.n))[0]

    def spot_check(self, samples: int = 1000, seed: int = 0):
        """Random checks of symmetry, zero diagonal and the triangle inequality.
        Returns ``(ok, witness)``."""
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            a, b, c = (int(t) for t in rng.integers(self.n, size=3))
            M = self.matrix([a, b, c], [a, b, c])
            if abs(M[0, 0]) > TOL or abs(M[0, 1] - M[1, 0]) > TOL or M[0, 1] < -TOL:
                return False, (a, b)
            if M[0, 2] > M[0, 1] + M[1, 2] + TOL:
                return False, (a, b, c)
        return True, None


class TorusBouquetSpace(MetricSample):
    """Grid samples of flat tori ℝᵈ/ℤᵈ glued at their origins.

    Point 0 is the shared basepoint; the others are labelled
    ``(torus index, integer grid coordinates)``.
    """

    def __init__(self, dims, grid: int):
        if not dims:
            raise ValueError("need at least one torus")
        if grid < 2:
            raise ValueError("grid must be at least 2")
        self.dims = list(dims)
        self.grid = grid
        pts = [(-1, ())]
        for t, d in enumerate(self.dims):
            if d < 1:
                raise ValueError("torus dimension must be positive")
            axes = np.indices((grid,) * d).reshape(d, -1).T
            for c in axes[1:]:
                pts.append((t, tuple(int(x) for x in c)))
        super().__init__(pts, None, 0)
        D = max(self.dims)
        self.tid = np.array([p[0] for p in pts])
        self.coords = np.zeros((self.n, D))
        for i, (_, c) in enumerate(pts):
            self.coords[i, :len(c)] = np.asarray(c, dtype=float) / grid
        self.r0 = np.sqrt((_wrap(self.coords) ** 2).sum(axis=1))

    def describe(self, i: int) -> str:
        t, c = self.points[i]
        if t < 0:
            return "O"
        return f"T{t}:(" + ",".join(str(Fraction(x, self.grid)) for x in c) + ")"

    def matrix(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        out = np.empty((len(rows), len(cols)))
        for s in range(0, len(rows), CHUNK):
            r = rows[s:s + CHUNK]
            diff = _wrap(self.coords[r][:, None, :] - self.coords[cols][None, :, :])
            flat = np.sqrt((diff ** 2).sum(axis=2))
            same = (self.tid[r][:, None] == self.tid[cols][None, :]) & (self.tid[r][:, None] >= 0)
            out[s:s + CHUNK] = np.where(same, flat, self.r0[r][:, None] + self.r0[cols][None, :])
        return out

    def radius_from_base(self) -> np.ndarray:
        return self.r0.copy()


def _wrap(x):
    a = np.abs(x) % 1.0
    return np.minimum(a, 1.0 - a)


def torus_bouquet_space(dims, grid: int) -> TorusBouquetSpace:
    return TorusBouquetSpace(dims, grid)


# ---------------------------------------------------------------------------
# separated nets


def _greedy_extend(space, domain, delta, order, start=()):
    chosen = list(start)
    domain = np.asarray(domain, dtype=np.int64)
    pos = {int(p): k for k, p in enumerate(domain)}
    mind = np.full(len(domain), np.inf)
    if chosen:
        for s in range(0, len(chosen), CHUNK):
            mind = np.minimum(mind, space.matrix(chosen[s:s + CHUNK], domain).min(axis=0))
    for p in order:
        k = pos[int(p)]
        if mind[k] >= delta - TOL:
            chosen.append(int(p))
            mind = np.minimum(mind, space.matrix([int(p)], domain)[0])
    return chosen


def _default_order(space, domain):
    r = space.radius_from_base()
    return sorted((int(p) for p in domain), key=lambda p: (round(float(r[p]), 12), p))


def greedy_snet(space: MetricSample, domain, delta, seed_order=None) -> list:
    """A maximal δ-separated subset of ``domain``, scanning points in ``seed_order``."""
    domain = sorted(int(p) for p in domain)
    if not domain:
        raise ValueError("empty domain")
    if not delta > 0:
        raise ValueError("delta must be positive")
    order = _restrict_order(seed_order, domain) if seed_order is not None else _default_order(space, domain)
    return _greedy_extend(space, domain, float(delta), order)


def _restrict_order(seed_order, domain):
    keep = set(domain)
    order = [int(p) for p in seed_order if int(p) in keep]
    if set(order) != keep:
        raise ValueError("seed_order must cover the domain")
    return order


def verify_snet(space: MetricSample, domain, net, delta):
    """Independent check that ``net`` is δ-separated and covers ``domain`` within δ.
    Returns ``(ok, witness)`` where the witness names the failing pair or point."""
    net = np.asarray(sorted(net), dtype=np.int64)
    domain = np.asarray(sorted(domain), dtype=np.int64)
    delta = float(delta)
    for s in range(0, len(net), CHUNK):
        M = space.matrix(net[s:s + CHUNK], net)
        for a in range(M.shape[0]):
            M[a, s + a] = np.inf
        if M.min() < delta - TOL:
            a, b = np.unravel_index(int(np.argmin(M)), M.shape)
            return False, ("separation", int(net[s + a]), int(net[b]), float(M[a, b]))
    for s in range(0, len(domain), CHUNK):
        M = space.matrix(domain[s:s + CHUNK], net).min(axis=1)
        if M.max() > delta + TOL:
            a = int(np.argmax(M))
            return False, ("coverage", int(domain[s + a]), float(M[a]))
    return True, None


@dataclass
class SnetChain:
    space: MetricSample
    nets: list
    deltas: list
    radii: list
    zeta: Fraction = None
    _gammas: dict = field(default_factory=dict, repr=False)

    @property
    def stages(self) -> int:
        return len(self.nets)

    def kappa(self, n: int) -> float:
        return float(self.zeta ** (n // 2))

    def gamma(self, n: int) -> "GammaGraph":
        """Γ_κ(N_n) with κ = ζ^⌊n/2⌋; stages are numbered from 1."""
        if n not in self._gammas:
            self._gammas[n] = gamma_graph(self.space, self.nets[n - 1], self.kappa(n))
        return self._gammas[n]


def nested_snets(space: MetricSample, radii, deltas, seed_order=None, zeta=None) -> SnetChain:
    """N_1 ⊆ N_2 ⊆ … with N_n a δ_n-snet of the ball of radius r_n about the basepoint."""
    if len(radii) != len(deltas) or not deltas:
        raise ValueError("radii and deltas must be nonempty and of equal length")
    if any(b >= a for a, b in zip(deltas, deltas[1:])) or deltas[-1] <= 0:
        raise ValueError("deltas must be positive and strictly decreasing")
    if any(b < a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be nondecreasing")
    r0 = space.radius_from_base()
    nets = []
    cur = []
    for r, d in zip(radii, deltas):
        domain = [int(p) for p in np.flatnonzero(r0 <= float(r) + TOL)]
        order = _restrict_order(seed_order, domain) if seed_order is not None else _default_order(space, domain)
        cur = _greedy_extend(space, domain, float(d), order, cur)
        ok, wit = verify_snet(space, domain, cur, d)
        if not ok:
            raise NetError(f"stage {len(nets) + 1} net failed verification", wit)
        if nets and not set(nets[-1]) <= set(cur):
            raise NetError("nesting failed", len(nets) + 1)
        nets.append(sorted(cur))
    z = Fraction(zeta).limit_denominator(10**6) if zeta is not None else None
    return SnetChain(space, nets, list(deltas), list(radii), z)


# ---------------------------------------------------------------------------
# Γ_κ graphs


@dataclass
class GammaGraph:
    nodes: np.ndarray
    edges: list  # (i, j, length) with local indices i < j
    kappa: float
    connected: bool
    _metric: np.ndarray = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    def csr(self):
        if not self.edges:
            return csr_matrix((self.n, self.n))
        e = np.asarray(self.edges, dtype=float)
        i, j = e[:, 0].astype(int), e[:, 1].astype(int)
        return csr_matrix((np.r_[e[:, 2], e[:, 2]], (np.r_[i, j], np.r_[j, i])), shape=(self.n, self.n))

    def metric(self) -> np.ndarray:
        if self._metric is None:
            self._metric = dijkstra(self.csr(), directed=False)
        return self._metric

    def to_networkx(self) -> nx.MultiGraph:
        G = nx.MultiGraph()
        G.add_nodes_from(range(self.n))
        for i, j, w in self.edges:
            G.add_edge(i, j, length=w)
        return G


def gamma_graph(space: MetricSample, A, kappa) -> GammaGraph:
    """The graph on A joining points at distance at most κ, with edge length the distance."""
    A = np.asarray(sorted(int(a) for a in A), dtype=np.int64)
    kappa = float(kappa)
    edges = []
    for s in range(0, len(A), CHUNK):
        M = space.matrix(A[s:s + CHUNK], A)
        ii, jj = np.nonzero((M > TOL) & (M <= kappa + TOL))
        for a, b in zip(ii, jj):
            if s + a < b:
                edges.append((int(s + a), int(b), float(M[a, b])))
    g = GammaGraph(A, edges, kappa, True)
    if g.n > 1:
        g.connected = connected_components(g.csr(), directed=False)[0] == 1
    return g


def net_metric_bounds_check(chain: SnetChain, zeta=None, stages=None) -> dict:
    """Check dist ≤ dist_n ≤ (1+6ζᵏ)(dist+2ζᵏ)+2ζᵏ, k = ⌊n/2⌋, on all pairs of N_n."""
    if chain.stages < 2:
        raise ValueError("the bounds are stated for stages n ≥ 2; chain has one stage")
    z = float(zeta if zeta is not None else chain.zeta)
    rows = []
    for n in stages or range(2, chain.stages + 1):
        k = n // 2
        zk = z ** k
        g = chain.gamma(n)
        D = chain.space.matrix(g.nodes, g.nodes)
        Dn = g.metric()
        upper = (1 + 6 * zk) * (D + 2 * zk) + 2 * zk
        low_bad = np.argwhere(D > Dn + TOL)
        up_bad = np.argwhere(Dn > upper + TOL)
        off = ~np.eye(g.n, dtype=bool)
        slack = (Dn[off] / upper[off]).max() if g.n > 1 else 0.0
        row = {"stage": n, "k": k, "points": g.n, "edges": len(g.edges), "connected": bool(g.connected),
               "pairs": g.n * (g.n - 1) // 2, "lower_violations": int(len(low_bad)) // 2,
               "upper_violations": int(len(up_bad)) // 2, "max_ratio_to_upper": float(slack)}
        if len(up_bad):
            a, b = up_bad[0]
            row["upper_witness"] = [int(g.nodes[a]), int(g.nodes[b]), float(D[a, b]), float(Dn[a, b])]
        if len(low_bad):
            a, b = low_bad[0]
            row["lower_witness"] = [int(g.nodes[a]), int(g.nodes[b]), float(D[a, b]), float(Dn[a, b])]
        rows.append(row)
    ok = all(r["lower_violations"] == 0 and r["upper_violations"] == 0 for r in rows)
    return {"ok": ok, "zeta": z, "stages": rows}


# ---------------------------------------------------------------------------
# fast increasing sequences and labellings


class SequenceError(ValueError):
    pass


def _edge_lengths(g):
    if isinstance(g, GammaGraph):
        return [w for _, _, w in g.edges]
    return [w for _, _, w in g.edges(data="length")]


def _demanded(d, length):
    return int(math.floor(d * length + TOL))


def _orbit_counts(W: WordSet) -> dict:
    counts = {}
    for r in W.representatives():
        counts[len(r)] = counts.get(len(r), 0) + 1
    return counts


def fast_sequence(graphs, zeta, W: WordSet, growth, eps, d_min: int = 1, d_max: int = 10**6):
    """Least integer d_n, stage by stage, meeting the finite proxies:

    (1) κ(i) ≥ E_n for every i ≥ ⌊ζⁿd_n⌋ within W's length range;
    (2′) ζⁿd_n / d_{n−1} ≥ growth·n for n ≥ 2;
    (3′) E_n / (ζⁿd_n) ≤ eps[n−1];
    and W supplies one unused orbit per edge at each demanded length ⌊d_n|e|⌋.
    Returns ``(d_seq, certificate)``.
    """
    zeta = Fraction(zeta).limit_denominator(10**6)
    growth = Fraction(growth).limit_denominator(10**6)
    eps = [Fraction(e).limit_denominator(10**6) for e in eps]
    if len(eps) < len(graphs):
        raise ValueError("need one eps value per stage")
    if any(b > a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps must be nonincreasing")
    kappa = cstar_profile(W).kappa_n
    orbits = _orbit_counts(W)
    if not kappa:
        raise SequenceError("word set is empty")
    lo, hi = min(kappa), max(kappa)
    d_seq, cert = [], []
    prev = None
    for n, g in enumerate(graphs, start=1):
        lengths = _edge_lengths(g)
        E = len(lengths)
        zn = zeta ** n
        d = max(d_min, prev + 1 if prev is not None else d_min)
        found = None
        reason = None
        while d <= d_max:
            t = math.floor(zn * d)
            if lengths and min(_demanded(d, x) for x in lengths) > hi:
                raise SequenceError(f"stage {n}: demanded length {min(_demanded(d, x) for x in lengths)} "
                                    f"exceeds the longest word in W ({hi}); last failure: {reason}")
            bad = [i for i in range(max(t, lo), hi + 1) if kappa.get(i, 0) < E]
            checks = {"(1)": {"from": t, "range": [lo, hi], "E": E, "deficient": bad[:5]}}
            ok = not bad
            if not ok:
                reason = f"κ({bad[0]}) = {kappa.get(bad[0], 0)} < E_{n} = {E}"
            if prev is not None:
                lhs = zn * d / prev
                checks["(2')"] = {"lhs": str(lhs), "rhs": str(growth * n)}
                if lhs < growth * n:
                    ok, reason = False, f"(2') {lhs} < {growth * n}"
            lhs3 = Fraction(E) / (zn * d)
            checks["(3')"] = {"lhs": str(lhs3), "rhs": str(eps[n - 1])}
            if lhs3 > eps[n - 1]:
                ok, reason = False, f"(3') {lhs3} > {eps[n - 1]}"
            need = {}
            for x in lengths:
                need[_demanded(d, x)] = need.get(_demanded(d, x), 0) + 1
            short = {L: c - orbits.get(L, 0) for L, c in need.items() if orbits.get(L, 0) < c}
            checks["supply"] = {str(L): c for L, c in sorted(need.items())}
            if short:
                ok, reason = False, f"supply short at lengths {sorted(short)}"
            if ok:
                found = d
                break
            d += 1
        if found is None:
            raise SequenceError(f"stage {n}: no d ≤ {d_max}; last failure: {reason}")
        d_seq.append(found)
        cert.append({"stage": n, "d": found, "checks": checks})
        prev = found
    return d_seq, cert


class LabelingError(ValueError):
    pass


@dataclass
class EdgeLabeling:
    words: dict  # (u, v, key) -> word, both orientations

    def word(self, u, v, key=0):
        return self.words[(u, v, key)]

    def verify(self):
        seen = {}
        for e, w in self.words.items():
            u, v, k = e
            if self.words.get((v, u, k)) != inverse(w):
                raise LabelingError(f"edge {e} is not inverse-compatible")
            if w in seen and seen[w] != e:
                raise LabelingError(f"edges {seen[w]} and {e} share a word")
            seen[w] = e
        return True


def _multi_edges(graph):
    """Undirected edges as sorted ``(u, v, key, length)`` for a GammaGraph or networkx graph."""
    if isinstance(graph, GammaGraph):
        return [(i, j, 0, w) for i, j, w in graph.edges]
    out = []
    if graph.is_multigraph():
        items = graph.edges(keys=True, data="length")
    else:
        items = ((u, v, 0, w) for u, v, w in graph.edges(data="length"))
    for u, v, k, w in items:
        if u > v:
            u, v = v, u
        out.append((u, v, k, w))
    return sorted(out)


def assign_edge_words(graph, W: WordSet, d_n: int, seed: int = 0) -> EdgeLabeling:
    """Give each edge its own W-orbit at length ⌊d_n|e|⌋; the reverse edge gets the inverse."""
    pool = {}
    for r in W.representatives():
        pool.setdefault(len(r), []).append(r)
    rng = random.Random(seed)
    for L in pool:
        rng.shuffle(pool[L])
    words = {}
    for u, v, k, length in _multi_edges(graph):
        L = _demanded(d_n, length)
        if not pool.get(L):
            raise LabelingError(f"W has no unused orbit of length {L} for edge ({u}, {v})")
        w = pool[L].pop()
        words[(u, v, k)] = w
        words[(v, u, k)] = inverse(w)
    lab = EdgeLabeling(words)
    lab.verify()
    return lab


# ---------------------------------------------------------------------------
# relations


def _adjacency(graph):
    adj = {}
    for u, v, k, _ in _multi_edges(graph):
        adj.setdefault(u, []).append((v, k))
        adj.setdefault(v, []).append((u, k))
    nodes = range(graph.n) if isinstance(graph, GammaGraph) else graph.nodes
    for x in nodes:
        adj.setdefault(x, [])
    for x in adj:
        adj[x].sort()
    return adj


def basis_cycles(graph, tree: str = "bfs", root=None) -> list:
    """Fundamental cycles of a spanning forest, as lists of directed edges (u, v, key)."""
    adj = _adjacency(graph)
    parent = {}
    used = set()
    for r in ([root] if root is not None else []) + sorted(adj):
        if r in parent:
            continue
        parent[r] = None
        frontier = [r]
        while frontier:
            x = frontier.pop(0) if tree == "bfs" else frontier.pop()
            nbrs = adj[x] if tree == "bfs" else list(reversed(adj[x]))
            for y, k in nbrs:
                if y not in parent:
                    parent[y] = (x, k)
                    used.add((min(x, y), max(x, y), k))
                    frontier.append(y)
    if tree not in ("bfs", "dfs"):
        raise ValueError(f"unknown tree kind {tree!r}")

    def up(x):
        path = [x]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]][0])
        return path

    cycles = []
    for u, v, k, _ in _multi_edges(graph):
        if (u, v, k) in used:
            continue
        pu, pv = up(u), up(v)
        common = set(pu) & set(pv)
        lca = next(x for x in pu if x in common)
        # edge u→v, then tree path v→lca→u
        cyc = [(u, v, k)]
        x = v
        while x != lca:
            p, kk = parent[x]
            cyc.append((x, p, kk))
            x = p
        down = []
        x = u
        while x != lca:
            p, kk = parent[x]
            down.append((p, x, kk))
            x = p
        cyc.extend(reversed(down))
        cycles.append(cyc)
    return cycles


def short_cycles(graph, bound: int) -> list:
    """Simple cycles with at most ``bound`` edges (each found in both directions)."""
    adj = _adjacency(graph)
    out = []
    for s in sorted(adj):
        stack = [(s, [], {s})]
        while stack:
            x, path, seen = stack.pop()
            for y, k in adj[x]:
                if path and (y, k) == (path[-1][0], path[-1][2]):
                    continue
                if y == s and path:
                    out.append(path + [(x, y, k)])
                elif y > s and y not in seen and len(path) + 1 < bound:
                    stack.append((y, path + [(x, y, k)], seen | {y}))
    return out


def cycle_word(labeling: EdgeLabeling, cycle) -> tuple:
    w = []
    for e in cycle:
        w.extend(labeling.words[e])
    return tuple(w)


def _canonical(w):
    c = cyclic_normalize(free_reduce(w))
    if not c:
        return c
    return min(c, cyclic_normalize(inverse(c)), key=word_key)


def build_relations(graph, labeling: EdgeLabeling, cycle_bound: int = 0, tree: str = "bfs") -> WordSet:
    """Relators from a cycle basis plus all simple cycles with at most ``cycle_bound`` edges."""
    cycles = basis_cycles(graph, tree) + (short_cycles(graph, cycle_bound) if cycle_bound else [])
    rels = {_canonical(cycle_word(labeling, c)) for c in cycles}
    rels.discard(())
    return WordSet(frozenset(rels), closed=False)


def relator_audit(graph, labeling: EdgeLabeling, d_n: int, tree: str = "bfs") -> list:
    """Per basis cycle: block lengths, demanded lengths and measured free cancellation."""
    lengths = {(u, v, k): w for u, v, k, w in _multi_edges(graph)}
    rows = []
    for c in basis_cycles(graph, tree):
        blocks = [len(labeling.words[e]) for e in c]
        demanded = [_demanded(d_n, lengths[(min(u, v), max(u, v), k)]) for u, v, k in c]
        reduced = len(cyclic_reduce(free_reduce(cycle_word(labeling, c))))
        rows.append({"edges": len(c), "blocks": blocks, "demanded": demanded,
                     "block_total": sum(blocks), "length": reduced, "cancellation": sum(blocks) - reduced})
    return rows


# ---------------------------------------------------------------------------
# the construction pipeline


@dataclass
class EOConfig:
    zeta: Fraction
    W: WordSet
    lam: Fraction = Fraction(1, 500)
    d_seq: list = None  # None means choose by fast_sequence
    stage_max: int = 1
    growth: Fraction = Fraction(1)
    eps: list = None
    cycle_bound: int = 0
    tree: str = "bfs"
    seed: int = 0

    def __post_init__(self):
        self.zeta = Fraction(self.zeta).limit_denominator(10**6)
        self.lam = Fraction(self.lam).limit_denominator(10**6)
        if not 0 < self.zeta < 1:
            raise ValueError("zeta must lie in (0, 1)")
        if self.d_seq is not None:
            if len(self.d_seq) < self.stage_max:
                raise ValueError("d_seq shorter than stage_max")
            if any(b <= a for a, b in zip(self.d_seq, self.d_seq[1:])) or any(d <= 0 for d in self.d_seq):
                raise ValueError("d_seq must be positive and increasing")
        ok, wit = check_cstar(self.W, self.lam)
        if not ok:
            raise ValueError(f"W fails C*({self.lam}): {wit}")


def stage_space(m: int) -> int:
    """0-based index of the space used at global stage m: the 2-adic valuation of m."""
    k = 0
    while m % 2 == 0:
        m //= 2
        k += 1
    return k


def eo_stage_graphs(cfg: EOConfig, spaces) -> tuple:
    """Stage graphs Γ_{ζ^⌊m/2⌋}(N_m) over the scheduled spaces, as ``(graphs, stage_info)``."""
    graphs, stage_info = [], []
    nets = {}
    for m in range(1, cfg.stage_max + 1):
        k = stage_space(m)
        if k >= len(spaces):
            raise ValueError(f"stage {m} needs space {k + 1} but only {len(spaces)} given")
        sp = spaces[k]
        r0 = sp.radius_from_base()
        domain = [int(p) for p in np.flatnonzero(r0 <= m + TOL)]
        delta = float(cfg.zeta ** m)
        cur = _greedy_extend(sp, domain, delta, _default_order(sp, domain), nets.get(k, []))
        ok, wit = verify_snet(sp, domain, cur, delta)
        if not ok:
            raise NetError(f"stage {m}: net failed verification", wit)
        nets[k] = cur
        g = gamma_graph(sp, cur, float(cfg.zeta ** (m // 2)))
        if not g.connected:
            raise NetError(f"stage {m}: Γ graph is disconnected")
        graphs.append(g)
        stage_info.append({"stage": m, "space": k, "points": g.n, "edges": len(g.edges),
                           "edge_lengths": sorted({round(w, 9) for _, _, w in g.edges})})
    return graphs, stage_info


def eo_labelings(cfg: EOConfig, graphs, d_seq) -> list:
    """The edge labelling of each stage graph, seeded by ``cfg.seed`` plus the stage."""
    out = []
    for m, (g, d) in enumerate(zip(graphs, d_seq), start=1):
        try:
            out.append(assign_edge_words(g, cfg.W, d, cfg.seed + m))
        except LabelingError as e:
            raise LabelingError(f"stage {m}: {e}") from None
    return out


def build_eo_presentation(cfg: EOConfig, spaces) -> tuple:
    """Stage graphs labelled by W and turned into relators.
    Returns ``(Presentation, diagnostics)``."""
    graphs, stage_info = eo_stage_graphs(cfg, spaces)
    if cfg.d_seq is None:
        d_seq, cert = fast_sequence(graphs, cfg.zeta, cfg.W, cfg.growth, cfg.eps or [1] * len(graphs))
    else:
        d_seq, cert = list(cfg.d_seq[:cfg.stage_max]), None
    relators = set()
    audit = []
    labelings = eo_labelings(cfg, graphs, d_seq)
    for m, (g, d, lab) in enumerate(zip(graphs, d_seq, labelings), start=1):
        rels = build_relations(g, lab, cfg.cycle_bound, cfg.tree)
        relators |= rels.words
        for row in relator_audit(g, lab, d, cfg.tree):
            row["stage"] = m
            audit.append(row)
        stage_info[m - 1].update(d=d, relators=len(rels))
    rels = sorted(relators, key=lambda w: (len(w), word_key(w)))
    P = Presentation(("a", "b"), tuple(rels))
    diag = {"stages": stage_info, "d_seq": d_seq, "certificate": cert, "audit": audit,
            "cstar_profile": [[n, str(lam), kap] for n, lam, kap in cstar_profile(cfg.W).rows()]}
    if rels:
        rep = piece_report(rels)
        diag["c_prime"] = {"max_piece": rep.max_piece, "lambda_measured": str(rep.lambda_measured),
                           "c_prime_1_10": rep.lambda_measured < Fraction(1, 10)}
    return P, diag


def load_eo_config(text: str, fmt: str = "toml") -> tuple:
    """Parse a config (TOML or JSON) into ``(EOConfig, spaces)``.

    Keys: zeta, lambda, d_seq (list or "auto"), stage_max, growth, eps,
    cycle_bound, tree, seed, spaces (list of {dims, grid}) and W, a table with
    lengths, per_length and seed passed to generate_cstar_words at lambda.
    """
    if fmt == "toml":
        import tomli
        d = tomli.loads(text)
    else:
        d = json.loads(text)
    lam = Fraction(str(d.get("lambda", "1/500")))
    wspec = d.get("W", {})
    gen = generate_cstar_words(lam, wspec.get("lengths", [8]), wspec.get("per_length", 4), seed=wspec.get("seed", 0))
    d_seq = d.get("d_seq", "auto")
    cfg = EOConfig(
        zeta=Fraction(str(d.get("zeta", "1/2"))), W=gen.words, lam=lam,
        d_seq=None if d_seq == "auto" else list(d_seq), stage_max=int(d.get("stage_max", 1)),
        growth=Fraction(str(d.get("growth", 1))), eps=[Fraction(str(e)) for e in d.get("eps", [])] or None,
        cycle_bound=int(d.get("cycle_bound", 0)), tree=d.get("tree", "bfs"), seed=int(d.get("seed", 0)))
    spaces = [torus_bouquet_space(s["dims"], int(s.get("grid", 2))) for s in d.get("spaces", [])]
    return cfg, spaces
