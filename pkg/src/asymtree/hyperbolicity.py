"""Thin triangles, the lines-and-centers hyperbolicity certificate, and the
distortion bounds for relative geodesics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cayley import BallGraph, RelBallGraph, RelPath, analyze_path, first_geodesic
from .relhyp import SatParams, neighborhood, saturation


def _parts(G):
    if isinstance(G, RelBallGraph):
        return G.base, G
    return G, None


def bottleneck(G, src: int, f: np.ndarray):
    """For every vertex v, the largest value of min(f) along a geodesic of G from
    src to v. Returns ``(dist_from_src, B)``; unreachable vertices get -1."""
    ball, rel = _parts(G)
    d = G.dist_from(src)
    f = np.asarray(f, dtype=np.int32)
    B = np.full(G.n, -1, dtype=np.int32)
    B[src] = f[src]
    order = np.argsort(d, kind="stable")
    counts = np.bincount(d[d >= 0])
    start = counts[0]
    prev = order[:start]
    for L in range(1, len(counts)):
        layer = order[start:start + counts[L]]
        start += counts[L]
        nb = ball.nbr[layer]
        valid = nb >= 0
        nbc = np.where(valid, nb, 0)
        pred = valid & (d[nbc] == L - 1)
        best = np.where(pred, B[nbc], -1).max(axis=1)
        if rel is not None:
            for i in range(rel.m):
                ids = rel.coset_ids[i]
                cm = np.full(len(rel.members[i]), -1, dtype=np.int32)
                np.maximum.at(cm, ids[prev], B[prev])
                best = np.maximum(best, cm[ids[layer]])
        B[layer] = np.minimum(f[layer], best)
        prev = layer
    return d, B


def _centered_nu(G, c: int) -> tuple:
    """Thinness over every triangle whose distinguished side vertex is c."""
    ball, _ = _parts(G)
    f = ball.dist_from(c)
    n = G.n
    D = np.empty((n, n), dtype=np.int16)
    Bm = np.empty((n, n), dtype=np.int16)
    for s in range(n):
        d, B = bottleneck(G, s, f)
        D[s] = d
        Bm[s] = B
    dc = D[c]
    best, wit = 0, None
    for x in range(n):
        ys = np.flatnonzero(dc[x] + dc == D[x])
        if not ys.size:
            continue
        vals = np.minimum(Bm[ys], Bm[x][None, :])
        per = vals.max(axis=1)
        k = int(np.argmax(per))
        if per[k] > best:
            best = int(per[k])
            wit = (x, int(ys[k]), int(np.argmax(vals[k])), c)
    return best, wit


def _interval(G, x, y):
    dx, dy = G.dist_from(x), G.dist_from(y)
    return np.flatnonzero(dx + dy == dx[y])


@dataclass
class ThinReport:
    nu: int
    mode: str
    radius: int
    witness: tuple = None
    triangles: int = 0

    def to_dict(self, words=None):
        return {"nu": self.nu, "mode": self.mode, "radius": self.radius,
                "witness": list(self.witness) if self.witness else None, "triangles": self.triangles}


def thin_triangle_delta(G, mode: str = "centered", samples: int = 200, seed: int = 0) -> ThinReport:
    """Worst-case thinness ν of geodesic triangles.

    For a triangle x, y, z and a vertex v on a geodesic from x to y, the
    adversary picks the other two sides to stay as far from v as possible; ν is
    the largest resulting distance from v to their union. Geodesics are taken
    in G (relative geodesics for a relative ball) while distance to v is
    always the word metric.

    Modes: ``exhaustive`` scans every triangle; ``centered`` scans every
    triangle whose distinguished vertex v is the identity; ``sampled`` draws
    seeded random triples and scans all v on their first side.
    """
    ball, _ = _parts(G)
    if mode == "exhaustive":
        best, wit = 0, None
        for c in range(G.n):
            b, w = _centered_nu(G, c)
            if b > best:
                best, wit = b, w
        return ThinReport(best, mode, ball.radius, wit, G.n ** 3)
    if mode == "centered":
        b, w = _centered_nu(G, 0)
        return ThinReport(b, mode, ball.radius, w, G.n ** 2)
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        best, wit = 0, None
        for _ in range(samples):
            x, y, z = (int(t) for t in rng.integers(G.n, size=3))
            for v in _interval(G, x, y):
                f = ball.dist_from(int(v))
                _, By = bottleneck(G, y, f)
                _, Bx = bottleneck(G, x, f)
                val = int(min(By[z], Bx[z]))
                if val > best:
                    best, wit = val, (x, y, z, int(v))
        return ThinReport(best, mode, ball.radius, wit, samples)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# lines and centers


class StructureError(ValueError):
    pass


class LineSystem:
    """Lines Λ_uv = N_κ₀(Sat^μ₀([u,v])) ordered by a nearest-point projection to
    [u,v], with centres chosen from the triple intersection of lines.

    Lines and centres are computed on demand and cached. ``overrides`` maps a
    sorted vertex triple to a forced centre (used for perturbation tests).
    """

    def __init__(self, rel: RelBallGraph, kappa0, mu0, center_rule: str = "sum"):
        if kappa0 < mu0:
            raise ValueError("need kappa0 ≥ mu0")
        self.rel = rel
        self.ball = rel.base
        self.kappa0 = kappa0
        self.mu0 = mu0
        self.center_rule = center_rule
        self._lines = {}
        self._centers = {}
        self.overrides = {}
        self.center_set_diam = 0

    def geodesic(self, u, v):
        if u <= v:
            return first_geodesic(self.ball, u, v)
        return tuple(reversed(first_geodesic(self.ball, v, u)))

    def line(self, u: int, v: int):
        """(members, pos) where pos[z] is the preorder position of z in Λ_uv (−1 if absent)."""
        key = (min(u, v), max(u, v))
        hit = self._lines.get(key)
        if hit is None:
            g = first_geodesic(self.ball, *key)
            sat = saturation(self.rel, g, SatParams(mu=self.mu0, M=self.mu0))
            mem = neighborhood(self.rel, sat, self.kappa0)
            by_id = sorted(range(len(g)), key=lambda k: g[k])
            rows = np.stack([self.ball.dist_from(g[k])[mem] for k in by_id])
            near = np.asarray(by_id)[np.argmin(rows, axis=0)]
            pos = np.full(self.ball.n, -1, dtype=np.int32)
            pos[mem] = near
            hit = (mem, pos, len(g) - 1)
            if len(self._lines) > 20000:
                self._lines.clear()
            self._lines[key] = hit
        mem, pos, top = hit
        if u > v:
            pos = np.where(pos >= 0, top - pos, -1)
        return mem, pos

    def center(self, u: int, v: int, w: int) -> int:
        if u == v or u == w:
            return u
        if v == w:
            return v
        key = tuple(sorted((u, v, w)))
        if key in self.overrides:
            return self.overrides[key]
        hit = self._centers.get(key)
        if hit is None:
            a, b, c = key
            cand = np.intersect1d(np.intersect1d(self.line(a, b)[0], self.line(b, c)[0]),
                                  self.line(a, c)[0])
            if not cand.size:
                raise StructureError(f"empty centre set for {key}; increase kappa0")
            if self.center_rule == "sum":
                score = (self.ball.dist_from(a)[cand].astype(np.int64) + self.ball.dist_from(b)[cand]
                         + self.ball.dist_from(c)[cand])
                hit = int(cand[int(np.argmin(score))])
            elif self.center_rule == "least-id":
                hit = int(cand[0])
            elif self.center_rule == "greatest-id":
                hit = int(cand[-1])
            else:
                raise ValueError(f"unknown centre rule {self.center_rule!r}")
            if cand.size > 1:
                dmax = max(int(self.rel.dist_from(int(x))[cand].max()) for x in cand)
                self.center_set_diam = max(self.center_set_diam, dmax)
            self._centers[key] = hit
        return hit

    def position(self, u: int, v: int, x: int, strict: bool = True) -> int:
        """Preorder position of x on Λ_uv. Off the line this is an error, or with
        ``strict=False`` the position of x's nearest geodesic vertex."""
        pos = self.line(u, v)[1]
        if pos[x] >= 0:
            return int(pos[x])
        if strict:
            raise StructureError(f"vertex {x} is not on the line {u}-{v}")
        g = self.geodesic(u, v)
        d = self.ball.dist_from(x)[list(g)]
        best = min(range(len(g)), key=lambda k: (d[k], g[k]))
        return best

    def interval(self, u, v, x, y, strict: bool = True) -> np.ndarray:
        """Λ_uv[x, y]: members z with x ≤ z ≤ y in the preorder of Λ_uv."""
        mem, pos = self.line(u, v)
        try:
            lo, hi = self.position(u, v, x, strict), self.position(u, v, y, strict)
        except StructureError:
            raise StructureError(f"interval endpoints not on the line {u}-{v}") from None
        return mem[(pos[mem] >= lo) & (pos[mem] <= hi)]

    def validate(self, triples, pairs):
        """Check (l1)-(l3) and (c1)-(c3) on the given triples and pairs."""
        for u, v in pairs:
            m1, p1 = self.line(u, v)
            m2, p2 = self.line(v, u)
            if not np.array_equal(np.sort(m1), np.sort(m2)):
                raise StructureError(f"(l3) fails: lines {u}-{v} and {v}-{u} differ")
            if u != v and not np.all(p1[m1] + p2[m1] == p1[m1].max() + p2[m1].min()):
                raise StructureError(f"(l3) fails: order on {u}-{v} is not reversed")
            if p1[u] != 0 and u != v:
                raise StructureError(f"(l1) fails: {u} is not minimal on its line")
        for u, v, w in triples:
            c = self.center(u, v, w)
            for perm in ((u, w, v), (v, u, w), (v, w, u), (w, u, v), (w, v, u)):
                if self.center(*perm) != c:
                    raise StructureError(f"(c1) fails at {(u, v, w)}")
            if self.center(u, u, v) != u:
                raise StructureError(f"(c2) fails at {(u, v)}")
            for a, b in ((u, v), (v, w), (u, w)):
                if a != b and self.line(a, b)[1][c] < 0:
                    raise StructureError(f"(c3) fails: centre of {(u, v, w)} not on line {a}-{b}")


def build_lines_centers(rel: RelBallGraph, kappa0=0, mu0=0, center_rule: str = "sum") -> LineSystem:
    return LineSystem(rel, kappa0, mu0, center_rule)


@dataclass
class BowditchReport:
    K_I: int
    K_II: int
    K_III: int
    radius: int
    kappa0: float
    mu0: float
    triples: int = 0
    center_set_diameter: int = 0
    witnesses: dict = field(default_factory=dict)

    @property
    def K(self):
        return max(self.K_I, self.K_II, self.K_III)

    def to_dict(self):
        return {"K_I": self.K_I, "K_II": self.K_II, "K_III": self.K_III, "K": self.K,
                "radius": self.radius, "kappa0": self.kappa0, "mu0": self.mu0,
                "triples": self.triples, "center_set_diameter": self.center_set_diameter}


def _rel_neighbors(rel, p):
    out = {int(q) for q in rel.base.nbr[p] if q >= 0}
    for i in range(rel.m):
        out.update(int(q) for q in rel.members[i][rel.coset_ids[i, p]])
    out.discard(p)
    return sorted(out)


def _hausdorff(rel, A, B) -> int:
    if not len(A) or not len(B):
        return 0
    dA = rel._bfs(A)
    dB = rel._bfs(B)
    return int(max(dA[B].max(), dB[A].max()))


def _diam(rel, A) -> int:
    if len(A) < 2:
        return 0
    return max(int(rel.dist_from(int(x))[A].max()) for x in A)


def bowditch_K(rel: RelBallGraph, ls: LineSystem, samples: int = None, seed: int = 0,
               base: int = 0, validate: bool = True) -> BowditchReport:
    """Least constants for conditions (I), (II), (III) in the relative metric.

    Triples are (base, v, w): all of them by default, or ``samples`` seeded
    random (v, w). Condition (I) is evaluated with each triple vertex in the
    first role; (II) runs over every edge (p, q) of the relative graph for the
    lines through ``base`` (only edges at the sampled w when sampling); (III)
    over every w on those lines. ``validate=False`` skips the structural
    checks, for measuring a deliberately corrupted system.
    """
    n = rel.n
    u = base
    if samples is None:
        vw = [(v, w) for v in range(n) for w in range(n)]
        vs = list(range(n))
    else:
        rng = np.random.default_rng(seed)
        vw = [tuple(int(t) for t in rng.integers(n, size=2)) for _ in range(samples)]
        vs = sorted({v for v, _ in vw})
    if validate:
        ls.validate([(u, v, w) for v, w in vw[:200]], [(u, v) for v in vs[:200]])
    K1 = K2 = K3 = 0
    wit = {}
    for v, w in vw:
        for a, b, c in ((u, v, w), (v, w, u), (w, u, v)):
            phi = ls.center(a, b, c)
            h = _hausdorff(rel, ls.interval(a, b, a, phi, validate), ls.interval(a, c, a, phi, validate))
            if h > K1:
                K1, wit["I"] = h, (a, b, c)
    # (II) over relative edges (p, q), (III) over w on the line through base and v
    if samples is None:
        probes = {v: range(n) for v in vs}
    else:
        probes = {}
        for v, w in vw:
            probes.setdefault(v, set()).add(w)
    for v in vs:
        if v == u:
            continue
        mem, pos = ls.line(u, v)
        cache = {}

        def seg_diam(a, b):
            lo, hi = sorted((ls.position(u, v, a, validate), ls.position(u, v, b, validate)))
            if (lo, hi) not in cache:
                cache[(lo, hi)] = _diam(rel, mem[(pos[mem] >= lo) & (pos[mem] <= hi)])
            return cache[(lo, hi)]

        for p in sorted(probes[v]):
            phi_p = ls.center(u, v, p)
            for q in _rel_neighbors(rel, p):
                d = seg_diam(phi_p, ls.center(u, v, q))
                if d > K2:
                    K2, wit["II"] = d, (u, v, p, q)
        for w in mem:
            d = seg_diam(int(w), ls.center(u, v, int(w)))
            if d > K3:
                K3, wit["III"] = d, (u, v, int(w))
    return BowditchReport(K1, K2, K3, rel.radius, ls.kappa0, ls.mu0, len(vw), ls.center_set_diam, wit)


# ---------------------------------------------------------------------------
# distortion of relative geodesics


def log_distortion_check(rel: RelBallGraph, p, q, nu: float = None) -> dict:
    """Largest word-metric distance from a vertex of q to the vertex set of p,
    with the comparison value (1+ν)·log₂|p| when ν is given."""
    p = list(p)
    d = rel.base.distances_from(p)
    measured = int(d[list(q)].max()) if len(q) else 0
    out = {"measured": measured, "length": len(p) - 1}
    if nu is not None:
        out["bound"] = (1 + nu) * math.log2(len(p) - 1) if len(p) > 2 else 0.0
        out["holds"] = measured <= out["bound"] + 1e-9
    return out


def cycle_components(c: RelPath, rel: RelBallGraph):
    """Components of a closed path, merging a component that wraps around the start."""
    comps, _ = analyze_path(c, rel)
    ne = len(c.edges)
    out = [[x.parabolic, x.coset, x.first, x.last] for x in comps]
    for a in out:
        if a[2] != 0:
            continue
        for b in out:
            if b is not a and b[3] == ne - 1 and b[0] == a[0] and b[1] == a[1]:
                b[3] = a[3] + ne
                a[0] = None
    return [tuple(x) for x in out if x[0] is not None]


def isolated_component_alpha(rel: RelBallGraph, cycles) -> dict:
    """max over cycles of (Σ dist_S over isolated components) / |cycle|, where a
    component is isolated when no other component of the cycle shares its coset."""
    best, wit = 0.0, None
    for c in cycles:
        if c.vertices[0] != c.vertices[-1]:
            raise ValueError("path is not closed")
        ne = len(c.edges)
        comps = cycle_components(c, rel)
        keys = [(i, k) for i, k, _, _ in comps]
        total = 0
        for (i, k, a, b), key in zip(comps, keys):
            if keys.count(key) == 1:
                u = c.vertices[a % ne]
                v = c.vertices[(b + 1) % ne]
                total += rel.base.dist(u, v)
        ratio = total / ne if ne else 0.0
        if ratio > best:
            best, wit = ratio, c.vertices
    return {"alpha": best, "cycles": len(cycles), "witness": wit}


def sample_rel_cycles(rel: RelBallGraph, count: int, max_len: int, seed: int = 0):
    """Closed relative paths: a random walk closed up by a relative geodesic."""
    from .relhyp import _rel_path, first_rel_geodesic
    rng = np.random.default_rng(seed)
    out = []
    tries = 0
    while len(out) < count and tries < 20 * count:
        tries += 1
        x = int(rng.integers(rel.n))
        walk = [x]
        k = int(rng.integers(1, max(2, max_len // 2) + 1))
        for _ in range(k):
            y = walk[-1]
            opts = list(rel.base.nbr[y][rel.base.nbr[y] >= 0])
            for i in range(rel.m):
                opts.extend(rel.members[i][rel.coset_ids[i, y]])
            opts = [int(o) for o in opts if o != y]
            walk.append(opts[int(rng.integers(len(opts)))])
        back = first_rel_geodesic(rel, walk[-1], x)
        verts = walk + list(back[1:])
        if 2 < len(verts) - 1 <= max_len:
            out.append(_rel_path(rel, verts))
    return out
