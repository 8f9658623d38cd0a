"""Measured constants for the tree-graded certificates of a relative Cayley ball.

Neighbourhoods are closed: N_d(A) = {v : dist_S(v, A) ≤ d}. All distances are
graph distances inside the ball, so every constant is valid for the radius it
was measured at and nothing more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cayley import RelBallGraph, analyze_path, first_geodesic, lift_path, RelPath

BIG = np.int32(1 << 20)


@dataclass
class SatParams:
    L: float = 1
    C: float = 0
    mu: float = 0
    M: float = 0

    def __post_init__(self):
        if self.L < 1 or self.C < 0 or self.mu < 0 or self.M < 0:
            raise ValueError("need L ≥ 1 and C, mu, M ≥ 0")


@dataclass
class FatParams:
    theta: float
    sigma: float = 2
    nu: float = 8

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if self.sigma < 1:
            raise ValueError("sigma must be at least 1")
        if self.nu < 4 * self.sigma:
            raise ValueError("nu must be at least 4·sigma")


@dataclass
class AlphaReport:
    condition: str
    params: dict
    per_radius: list = field(default_factory=list)
    verdict: str = "recorded"
    bound: float = None

    def measured(self):
        return [e["measured"] for e in self.per_radius]

    def merge(self, other: "AlphaReport") -> "AlphaReport":
        return AlphaReport(self.condition, self.params, self.per_radius + other.per_radius,
                           self.verdict, self.bound)

    def to_dict(self):
        return {"condition": self.condition, "params": _jsonable(self.params),
                "per_radius": _jsonable(self.per_radius), "verdict": self.verdict}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else None
    if isinstance(x, Fraction):
        return float(x)
    return x


def _finish(report: AlphaReport, bound):
    if bound is not None:
        report.bound = bound
        ok = all(e["measured"] is not None and e["measured"] <= bound for e in report.per_radius)
        report.verdict = "pass" if ok else "fail"
    return report


def _word(rel, v):
    from .words import format_word
    return format_word(rel.base.words[v], rel.base.names)


def coset_distance(rel: RelBallGraph, i: int, c: int) -> np.ndarray:
    """dist_S from every ball vertex to the ball part of coset c of H_i."""
    return rel.base.distances_from(rel.members[i][c])


def neighborhood(rel: RelBallGraph, sources, d) -> np.ndarray:
    """Vertices within S-distance d of the sources (closed), by a local search."""
    d = math.floor(d + 1e-9)
    nbr = rel.base.nbr
    seen = np.zeros(rel.n, dtype=bool)
    front = np.unique(np.asarray(sources, dtype=np.int64))
    seen[front] = True
    for _ in range(d):
        nb = nbr[front].ravel()
        nb = nb[nb >= 0]
        nb = np.unique(nb[~seen[nb]])
        if not nb.size:
            break
        seen[nb] = True
        front = nb
    return np.flatnonzero(seen)


def saturation(rel: RelBallGraph, q, sp: SatParams) -> np.ndarray:
    """Vertices of q together with every ball-coset A with N_mu(A) meeting q."""
    q = np.asarray(q, dtype=np.int64)
    dq = rel.base.distances_from(q)
    keep = np.zeros(rel.n, dtype=bool)
    keep[q] = True
    for i in range(rel.m):
        ids = rel.coset_ids[i]
        best = np.full(len(rel.members[i]), BIG, dtype=np.int32)
        np.minimum.at(best, ids, dq.astype(np.int32))
        near = best <= sp.mu + 1e-9
        keep |= near[ids]
    return np.flatnonzero(keep)


def _diameter(rel: RelBallGraph, verts) -> tuple:
    verts = np.asarray(sorted(int(v) for v in verts), dtype=np.int64)
    best = (0, int(verts[0]), int(verts[0]))
    for a in verts:
        ds = rel.base._bfs([a], targets=verts)[verts]
        k = int(np.argmax(ds))
        if ds[k] > best[0]:
            best = (int(ds[k]), int(a), int(verts[k]))
    return best


def alpha1_report(rel: RelBallGraph, delta, bound=None) -> AlphaReport:
    """Largest diameter of N_δ(A) ∩ N_δ(B) over distinct ball-cosets A, B."""
    cosets = rel.cosets()
    if len(cosets) < 2:
        raise ValueError("need at least two distinct ball-cosets")
    cover = {}
    for k, (i, c, mem) in enumerate(cosets):
        for v in neighborhood(rel, mem, delta):
            cover.setdefault(int(v), []).append(k)
    inter = {}
    for v, ks in cover.items():
        for a in range(len(ks)):
            for b in range(a + 1, len(ks)):
                inter.setdefault((ks[a], ks[b]), []).append(v)
    best, wit = 0, None
    for (a, b), verts in sorted(inter.items()):
        if len(verts) < 2:
            continue
        d, x, y = _diameter(rel, verts)
        if d > best:
            best = d
            wit = {"cosets": [list(cosets[a][:2]), list(cosets[b][:2])],
                   "pair": [_word(rel, x), _word(rel, y)], "size": len(verts)}
    rep = AlphaReport("alpha1", {"delta": delta})
    rep.per_radius.append({"r": rel.radius, "measured": best, "witnesses": wit,
                           "coset_pairs": len(inter)})
    return _finish(rep, bound)


def _bottleneck_from(rel: RelBallGraph, x: int, f: np.ndarray):
    """Max over ball geodesics from x to v of the minimum of f along it, for all v."""
    ball = rel.base
    dx = ball.dist_from(x)
    B = np.full(rel.n, -1, dtype=np.int32)
    B[x] = f[x]
    order = np.argsort(dx, kind="stable")
    counts = np.bincount(dx[dx >= 0])
    start = counts[0]
    for L in range(1, len(counts)):
        layer = order[start:start + counts[L]]
        start += counts[L]
        nb = ball.nbr[layer]
        valid = (nb >= 0)
        nbc = np.where(valid, nb, 0)
        pred = valid & (dx[nbc] == L - 1)
        vals = np.where(pred, B[nbc], -1)
        B[layer] = np.minimum(f[layer], vals.max(axis=1))
    return dx, B


def _identity_cosets(rel):
    return [(i, int(rel.coset_ids[i, 0]), rel.members[i][rel.coset_ids[i, 0]]) for i in range(rel.m)]


def alpha2_report(rel: RelBallGraph, theta, cosets="identity", bound=None) -> AlphaReport:
    """Smallest M such that every ball geodesic of length ℓ with both endpoints
    in N_{θℓ}(A) meets N_M(A), per ℓ and overall.

    ``cosets="identity"`` uses the cosets H_i themselves (left translation
    carries every coset to one of them in the group, though not in the ball);
    ``"all"`` scans every ball-coset.
    """
    if not 0 <= theta < 0.5:
        raise ValueError("theta must lie in [0, 1/2)")
    todo = _identity_cosets(rel) if cosets == "identity" else rel.cosets()
    th = float(theta)  # Fraction times an int array would go elementwise through Python
    per_len = {}
    wit = None
    best = 0
    maxl = 2 * rel.radius
    for i, c, mem in todo:
        f = coset_distance(rel, i, c).astype(np.int32)
        for x in np.flatnonzero(f <= th * maxl + 1e-9):
            dx, B = _bottleneck_from(rel, int(x), f)
            ok = (dx >= 1) & (f[x] <= th * dx + 1e-9) & (f <= th * dx + 1e-9)
            ys = np.flatnonzero(ok)
            if not ys.size:
                continue
            Ls, vals = dx[ys].astype(np.int64), B[ys]
            top = np.full(maxl + 1, -1, dtype=np.int64)
            np.maximum.at(top, Ls, vals)
            for L in np.flatnonzero(top >= 0):
                per_len[int(L)] = max(per_len.get(int(L), -1), int(top[L]))
            k = int(np.argmax(vals))
            if vals[k] > best:
                best = int(vals[k])
                wit = {"coset": [i, c], "x": _word(rel, x), "y": _word(rel, int(ys[k])),
                       "length": int(Ls[k])}
    rep = AlphaReport("alpha2", {"theta": theta, "cosets": cosets})
    rep.per_radius.append({"r": rel.radius, "measured": best, "witnesses": wit,
                           "per_length": {str(k): per_len[k] for k in sorted(per_len)}})
    return _finish(rep, bound)


# ---------------------------------------------------------------------------
# quasi-geodesics


def is_quasi_geodesic(ball, path, L, C) -> bool:
    path = list(path)
    for j in range(len(path)):
        row = ball.dist_from(path[j])
        for i in range(j):
            d = row[path[i]]
            if d < (j - i) / L - C - 1e-9 or d > L * (j - i) + C + 1e-9:
                return False
    return True


def sample_quasi_geodesics(ball, L, C, count, max_len, seed=0, start=None):
    """Seeded random (L,C)-quasi-geodesic edge paths in the ball.

    Each sample walks from a random vertex (or ``start``), choosing uniformly
    among neighbours that keep the quasi-geodesic inequalities.
    """
    rng = np.random.default_rng(seed)
    out = []
    attempts = 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        x = int(start) if start is not None else int(rng.integers(ball.n))
        target = int(rng.integers(1, max_len + 1))
        path = [x]
        rows = [ball.dist_from(x)]
        while len(path) <= target:
            j = len(path)
            cands = [int(y) for y in ball.nbr[path[-1]] if y >= 0]
            good = []
            for y in cands:
                if all(rows[i][y] >= (j - i) / L - C - 1e-9 for i in range(j)):
                    good.append(y)
            if not good:
                break
            y = good[int(rng.integers(len(good)))]
            path.append(y)
            rows.append(ball.dist_from(y))
        if len(path) >= 2:
            out.append(tuple(path))
    return out


def alpha2_prime_report(rel: RelBallGraph, theta, L, C, samples=100, max_len=None, seed=0,
                        bound=None) -> AlphaReport:
    """Sampled quasi-geodesic variant of alpha2: M over sampled (L,C)-quasi-geodesics
    of length ℓ with endpoints in N_{θℓ}(A) for the identity cosets."""
    max_len = max_len or 2 * rel.radius
    paths = sample_quasi_geodesics(rel.base, L, C, samples, max_len, seed)
    best, wit = 0, None
    hits = 0
    for i, c, mem in _identity_cosets(rel):
        f = coset_distance(rel, i, c)
        for p in paths:
            ell = len(p) - 1
            if f[p[0]] <= theta * ell and f[p[-1]] <= theta * ell:
                hits += 1
                val = int(f[list(p)].min())
                if val > best:
                    best, wit = val, {"coset": [i, c], "path": [_word(rel, v) for v in p]}
    rep = AlphaReport("alpha2prime", {"theta": theta, "L": L, "C": C, "samples": samples, "seed": seed})
    rep.per_radius.append({"r": rel.radius, "measured": best, "witnesses": wit, "qualifying": hits})
    return _finish(rep, bound)


def quasiconvexity_report(rel: RelBallGraph, L, C, d, samples=100, max_len=None, seed=0) -> AlphaReport:
    """Measured t with every sampled (L,C)-quasi-geodesic joining points of N_d(A)
    inside N_{t·d}(A), over the identity cosets."""
    max_len = max_len or 2 * rel.radius
    paths = sample_quasi_geodesics(rel.base, L, C, samples, max_len, seed)
    t = 0.0
    for i, c, mem in _identity_cosets(rel):
        f = coset_distance(rel, i, c)
        for p in paths:
            if f[p[0]] <= d and f[p[-1]] <= d:
                t = max(t, float(f[list(p)].max()) / max(d, 1e-9))
    rep = AlphaReport("quasiconvexity", {"L": L, "C": C, "d": d, "samples": samples, "seed": seed})
    rep.per_radius.append({"r": rel.radius, "measured": t, "witnesses": None})
    return rep


# ---------------------------------------------------------------------------
# fat polygons


class PolygonError(ValueError):
    pass


def _polygon_vertices(P):
    return [e[0] for e in P]


def is_fat_polygon(ball, P, fp: FatParams):
    """Check (F1) and (F2) for a closed polygon given as a list of vertex paths.

    P∖q is read as the union of the other edges, so overlapping edges are at
    distance 0. Returns ``(ok, margin)`` where margin is the least slack over all
    instances (infinite when every instance is vacuous).
    """
    k = len(P)
    if k < 2:
        raise PolygonError("a polygon needs at least two edges")
    for j, e in enumerate(P):
        if e[-1] != P[(j + 1) % k][0]:
            raise PolygonError(f"edge {j} does not end where edge {(j + 1) % k} starts")
        if len(e) - 1 != ball.dist(e[0], e[-1]):
            raise PolygonError(f"edge {j} is not a geodesic")
        for a, b in zip(e, e[1:]):
            if ball.dist(a, b) != 1:
                raise PolygonError(f"edge {j} is not an edge path")
    th, sg, nu = fp.theta, fp.sigma, fp.nu
    margin = math.inf
    allv = [set(e) for e in P]
    for j, e in enumerate(P):
        x, y = e[0], e[-1]
        others = set().union(*(allv[t] for t in range(k) if t != j))
        dxr, dyr = ball.dist_from(x), ball.dist_from(y)
        inner = [v for v in e if dxr[v] > sg * th + 1e-9 and dyr[v] > sg * th + 1e-9]
        if inner and others:
            others = np.fromiter(others, dtype=np.int64)
            d = min(int(ball.dist_from(v)[others].min()) for v in inner)
            margin = min(margin, d - th)
    for j in range(k):
        x = P[j][0]
        O = set().union(*(allv[t] for t in range(k) if t not in (j, (j - 1) % k)))
        if O:
            d = int(ball.dist_from(x)[np.fromiter(O, dtype=np.int64)].min())
            margin = min(margin, d - nu * th)
    return margin >= -1e-9, margin


def polygon_from_vertices(ball, corners):
    """Closed polygon whose edges are the first ball geodesics between consecutive corners."""
    k = len(corners)
    return [first_geodesic(ball, corners[j], corners[(j + 1) % k]) for j in range(k)]


def _chi(rel, P):
    """min over ball-cosets A of max over polygon vertices of dist_S(v, A)."""
    verts = sorted(set(v for e in P for v in e))
    rows = np.stack([rel.base.dist_from(v) for v in verts]).astype(np.int32)
    best = (math.inf, None)
    for i in range(rel.m):
        ids = rel.coset_ids[i]
        nc = len(rel.members[i])
        per = np.full((len(verts), nc), BIG, dtype=np.int32)
        for r in range(len(verts)):
            np.minimum.at(per[r], ids, rows[r])
        worst = per.max(axis=0)
        c = int(np.argmin(worst))
        if worst[c] < best[0]:
            best = (int(worst[c]), (i, c))
    return best


def _spread_corners(ball, k, rng, candidates=32):
    """Corners chosen one at a time, each the farthest (from those chosen) of a
    random candidate batch."""
    corners = [int(rng.integers(ball.n))]
    d = ball.dist_from(corners[0]).astype(np.int64)
    while len(corners) < k:
        cand = rng.choice(ball.n, size=min(candidates, ball.n), replace=False)
        c = int(cand[int(np.argmax(d[cand]))])
        if c in corners:
            break
        corners.append(c)
        d = np.minimum(d, ball.dist_from(c))
    if len(corners) < k:
        return [int(v) for v in rng.choice(ball.n, size=k, replace=False)]
    return corners


def alpha3_report(rel: RelBallGraph, fp: FatParams, k: int = 4, samples: int = 200, seed: int = 0,
                  bound=None) -> AlphaReport:
    """χ over sampled fat k-gons: each polygon's distance to its best-fitting coset.

    Corners are drawn in rotation from one random ball-coset, uniformly from
    the ball, or spread out by a randomized farthest-point rule. Without any fat polygon the verdict is vacuous.
    """
    if k not in (3, 4):
        raise ValueError("k must be 3 or 4")
    rng = np.random.default_rng(seed)
    cos = rel.cosets(min_size=k)
    best, wit, fat = 0, None, 0
    seen = set()
    for s in range(samples):
        if cos and s % 3 == 0:
            mem = cos[int(rng.integers(len(cos)))][2]
            corners = [int(v) for v in rng.choice(mem, size=k, replace=False)]
        elif s % 3 == 1:
            corners = [int(v) for v in rng.choice(rel.n, size=k, replace=False)]
        else:
            corners = _spread_corners(rel.base, k, rng)
        key = tuple(corners)
        if key in seen:
            continue
        seen.add(key)
        P = polygon_from_vertices(rel.base, corners)
        ok, _ = is_fat_polygon(rel.base, P, fp)
        if not ok:
            continue
        fat += 1
        chi, where = _chi(rel, P)
        if chi > best or wit is None:
            best = max(best, chi)
            wit = {"corners": [_word(rel, v) for v in corners], "coset": list(where)}
    rep = AlphaReport("alpha3", {"theta": fp.theta, "sigma": fp.sigma, "nu": fp.nu, "k": k,
                                 "samples": samples, "seed": seed})
    entry = {"r": rel.radius, "measured": best if fat else None, "witnesses": wit, "fat_polygons": fat}
    rep.per_radius.append(entry)
    if not fat:
        rep.verdict = "vacuous"
        return rep
    return _finish(rep, bound)


# ---------------------------------------------------------------------------
# BCP


def bi_lipschitz_paths(rel: RelBallGraph, lam, len_cap: int, start: int = 0):
    """All λ-bi-Lipschitz backtracking-free vertex paths in the relative graph
    from ``start`` with at most ``len_cap`` edges (including the trivial path)."""
    out = []
    ids = rel.coset_ids
    m = rel.m
    nbr = rel.base.nbr
    rows = {}

    def row(v):
        r = rows.get(v)
        if r is None:
            r = rows[v] = rel.dist_from(v)
        return r

    def neighbours(x):
        parts = [nbr[x][nbr[x] >= 0]]
        for i in range(m):
            parts.append(rel.members[i][ids[i, x]])
        s = np.unique(np.concatenate(parts))
        return s[s != x]

    def rec(path, runs, used):
        out.append(tuple(path))
        if len(path) - 1 >= len_cap:
            return
        j = len(path)
        x = path[-1]
        for v in neighbours(x):
            v = int(v)
            rv = row(v)
            if any(rv[path[i]] * lam < j - i - 1e-9 for i in range(j)):
                continue
            new_runs = list(runs)
            new_used = used
            bad = False
            for i in range(m):
                c = ids[i, x]
                if ids[i, v] == c:
                    if runs[i] != c:
                        if (i, c) in used:
                            bad = True
                            break
                        new_used = new_used | {(i, int(c))}
                        new_runs[i] = c
                else:
                    new_runs[i] = -1
            if bad:
                continue
            path.append(v)
            rec(path, new_runs, new_used)
            path.pop()

    rec([start], [-1] * m, frozenset())
    return out


def bcp_report(rel: RelBallGraph, lam, len_cap: int, starts="identity", bound=None) -> AlphaReport:
    """Measured BCP constants (a₁, a₂) over pairs of λ-bi-Lipschitz
    backtracking-free paths with a common start and ends at S-distance ≤ 1."""
    if lam < 1:
        raise ValueError("lambda must be at least 1")
    ball = rel.base
    start_list = [0] if starts == "identity" else list(range(rel.n))
    a1, a2 = 0, 0
    w1 = w2 = None
    npaths = 0
    for s in start_list:
        paths = bi_lipschitz_paths(rel, lam, len_cap, s)
        npaths += len(paths)
        total = {}
        info = {}  # end -> coset -> [count, maxlen, entries, exits]
        for p in paths:
            e = p[-1]
            total[e] = total.get(e, 0) + 1
            comps, _ = analyze_path(RelPath(list(p), [None] * (len(p) - 1)), rel)
            d = info.setdefault(e, {})
            for c in comps:
                key = (c.parabolic, c.coset)
                u, v = p[c.first], p[c.last + 1]
                rec = d.setdefault(key, [0, -1, set(), set(), None])
                rec[0] += 1
                length = ball.dist(u, v)
                if length > rec[1]:
                    rec[1] = length
                    rec[4] = p
                rec[2].add(u)
                rec[3].add(v)
        for e, d in info.items():
            near = [e] + [int(y) for y in ball.nbr[e] if y >= 0 and y in total]
            for f in near:
                if f not in total:
                    continue
                df = info.get(f, {})
                for key, rec in d.items():
                    other = df.get(key)
                    if other is None or other[0] < total[f]:
                        if rec[1] > a1:
                            a1 = rec[1]
                            w1 = {"path": [_word(rel, v) for v in rec[4]], "coset": list(key),
                                  "partner_end": _word(rel, f)}
                    if other is not None:
                        for A, B in ((rec[2], other[2]), (rec[3], other[3])):
                            Bl = np.fromiter(B, dtype=np.int64)
                            for u in A:
                                dd = int(ball.dist_from(u)[Bl].max())
                                if dd > a2:
                                    a2 = dd
                                    w2 = {"coset": list(key), "ends": [_word(rel, e), _word(rel, f)]}
    rep = AlphaReport("BCP", {"lambda": lam, "len_cap": len_cap, "starts": starts})
    rep.per_radius.append({"r": rel.radius, "measured": max(a1, a2), "a1": a1, "a2": a2,
                           "paths": npaths, "witnesses": {"a1": w1, "a2": w2}})
    return _finish(rep, bound)


# ---------------------------------------------------------------------------
# Morse diagnostics


def first_rel_geodesic(rel: RelBallGraph, u: int, v: int):
    """A rel-geodesic from u to v, choosing at each step the least vertex id."""
    dv = rel.dist_from(v)
    path = [u]
    x = u
    while x != v:
        want = dv[x] - 1
        cands = list(rel.base.nbr[x][rel.base.nbr[x] >= 0])
        for i in range(rel.m):
            cands.extend(rel.members[i][rel.coset_ids[i, x]])
        x = min(int(y) for y in cands if dv[y] == want)
        path.append(x)
    return tuple(path)


def _rel_path(rel, verts):
    edges = []
    for a, b in zip(verts, verts[1:]):
        hit = [x for x in rel.base.letters if rel.base.step(a, x) == b]
        if hit:
            edges.append(("S", hit[0]))
        else:
            i = rel.same_coset(a, b)[0]
            edges.append(("H", i, int(rel.coset_ids[i, a])))
    return RelPath(list(verts), edges)


def _dist_to_set(ball, pts, target) -> np.ndarray:
    d = ball.distances_from(target)
    return d[np.asarray(pts, dtype=np.int64)]


def morse_report(rel: RelBallGraph, g, q, p, sp: SatParams, kappa=None) -> AlphaReport:
    """Measured τ₁, δ, τ₃, τ₄ for an S-geodesic g, an S-quasi-geodesic q and a
    rel-geodesic p with common endpoints."""
    ball = rel.base
    if not (g[0] == q[0] == p[0] and g[-1] == q[-1] == p[-1]):
        raise ValueError("g, q and p must share endpoints")
    if not is_quasi_geodesic(ball, q, sp.L, sp.C):
        raise ValueError("q is not an (L,C)-quasi-geodesic in the ball")
    kappa = sp.mu if kappa is None else kappa
    satg = saturation(rel, g, SatParams(sp.L, sp.C, sp.M, sp.M))
    tau1 = int(_dist_to_set(ball, q, satg).max())

    # item 2: sub-paths of q running from N_κ(A) to N_κ(B), A ≠ B in Sat^M(g)
    dg = ball.distances_from(g)
    delta = 0
    qa = np.asarray(q, dtype=np.int64)
    cos = []
    for i in range(rel.m):
        best = np.full(len(rel.members[i]), BIG, dtype=np.int32)
        np.minimum.at(best, rel.coset_ids[i], dg.astype(np.int32))
        cos.extend((i, int(c)) for c in np.flatnonzero(best <= sp.M + 1e-9))
    near = [ball.distances_from(rel.members[i][c])[qa] <= kappa for (i, c) in cos]
    for a in range(len(cos)):
        for b in range(len(cos)):
            if a == b:
                continue
            inA, inB = near[a], near[b]
            last_a = -1
            for t in range(len(q)):
                if inB[t] and last_a >= 0:
                    delta = max(delta, int(dg[q[last_a]]), int(dg[q[t]]))
                    last_a = -1
                if inA[t]:
                    last_a = t

    # item 3: Hausdorff distance in the relative metric
    dq = rel._bfs(list(q))
    dp = rel._bfs(list(p))
    tau3 = int(max(dq[list(p)].max(), dp[list(q)].max()))

    # item 4: lifts and τ-saturations, both directions
    lift = lift_path(_rel_path(rel, p), rel)
    tau4 = None
    for tau in range(0, 4 * rel.radius + 2):
        s1 = saturation(rel, lift, SatParams(sp.L, sp.C, tau, sp.M))
        s2 = saturation(rel, q, SatParams(sp.L, sp.C, tau, sp.M))
        if _dist_to_set(ball, q, s1).max() <= tau and _dist_to_set(ball, lift, s2).max() <= tau:
            tau4 = tau
            break
    rep = AlphaReport("morse", {"L": sp.L, "C": sp.C, "M": sp.M, "kappa": kappa})
    rep.per_radius.append({"r": rel.radius, "measured": max(tau1, delta, tau3, tau4 or 0),
                           "tau1": tau1, "delta": delta, "tau3": tau3, "tau4": tau4,
                           "witnesses": None})
    return rep


def morse_sweep_samples(ball_small, L, C, samples, seed, max_len=None):
    """Seeded quasi-geodesic samples, recorded as words so they transfer to larger balls."""
    max_len = max_len or 2 * ball_small.radius
    paths = sample_quasi_geodesics(ball_small, L, C, samples, max_len, seed)
    return [[ball_small.words[v] for v in p] for p in paths]


def morse_table(rel: RelBallGraph, word_paths, sp: SatParams) -> AlphaReport:
    """Max of each Morse quantity over quasi-geodesics given as word sequences."""
    ball = rel.base
    agg = {"tau1": 0, "delta": 0, "tau3": 0, "tau4": 0}
    used = 0
    skipped = 0
    for wp in word_paths:
        q = tuple(ball.index[w] for w in wp)
        if not is_quasi_geodesic(ball, q, sp.L, sp.C):
            skipped += 1
            continue
        g = first_geodesic(ball, q[0], q[-1])
        p = first_rel_geodesic(rel, q[0], q[-1])
        e = morse_report(rel, g, q, p, sp).per_radius[0]
        used += 1
        for key in agg:
            agg[key] = max(agg[key], e[key] if e[key] is not None else -1)
    rep = AlphaReport("morse", {"L": sp.L, "C": sp.C, "M": sp.M, "mu": sp.mu, "samples": len(word_paths)})
    rep.per_radius.append({"r": rel.radius, "measured": max(agg.values()), **agg,
                           "used": used, "skipped": skipped, "witnesses": None})
    return rep
