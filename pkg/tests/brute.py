"""Slow reference computations shared by the tests.

Everything here works from the group oracle and networkx directly, without
the coset ids, bottleneck recursions or path searches of the package.
"""

import itertools

import networkx as nx
import numpy as np

from asymtree.words import inverse


def s_graph(ball):
    G = nx.Graph()
    G.add_nodes_from(range(ball.n))
    for u, w in enumerate(ball.words):
        for x in ball.letters:
            nf = ball.oracle.normal_form(w + (x,))
            if nf in ball.index:
                G.add_edge(u, ball.index[nf])
    return G


def same_coset(ball, u, v, i):
    return ball.oracle.in_parabolic(inverse(ball.words[u]) + ball.words[v], i)


def coset_classes(ball, i):
    """Cosets of parabolic i met by the ball, as sorted vertex lists."""
    classes = []
    for v in range(ball.n):
        for c in classes:
            if same_coset(ball, c[0], v, i):
                c.append(v)
                break
        else:
            classes.append([v])
    return classes


def rel_graph(ball):
    G = s_graph(ball)
    for i in range(len(ball.oracle.parabolics)):
        for c in coset_classes(ball, i):
            G.add_edges_from(itertools.combinations(c, 2))
    return G


def apsp(G, n):
    D = np.full((n, n), -1, dtype=np.int64)
    for u, row in nx.all_pairs_shortest_path_length(G):
        for v, d in row.items():
            D[u, v] = d
    return D


def alpha1(ball, delta):
    """Largest diameter of N_δ(A) ∩ N_δ(B) over distinct cosets met by the ball."""
    DS = apsp(s_graph(ball), ball.n)
    cosets = []
    for i in range(len(ball.oracle.parabolics)):
        cosets.extend(coset_classes(ball, i))
    # a coset shared by two parabolics is one set
    cosets = [list(c) for c in {tuple(c) for c in cosets}]
    nbhd = [set(np.flatnonzero((DS[:, c] <= delta).any(axis=1))) for c in cosets]
    best = 0
    for a, b in itertools.combinations(range(len(cosets)), 2):
        common = sorted(nbhd[a] & nbhd[b])
        if len(common) > 1:
            best = max(best, int(DS[np.ix_(common, common)].max()))
    return best


def components(ball, path):
    """(parabolic, coset representative, first index, last index) of every maximal
    run of consecutive vertices in one coset."""
    out = []
    for i in range(len(ball.oracle.parabolics)):
        k = 0
        while k < len(path) - 1:
            if not same_coset(ball, path[k], path[k + 1], i):
                k += 1
                continue
            j = k + 1
            while j + 1 < len(path) and same_coset(ball, path[k], path[j + 1], i):
                j += 1
            out.append((i, min(coset_classes_cached(ball, i)[path[k]]), k, j))
            k = j
    return out


_class_cache = {}


def coset_classes_cached(ball, i):
    key = (id(ball), i)
    if key not in _class_cache:
        where = {}
        for c in coset_classes(ball, i):
            for v in c:
                where[v] = c
        _class_cache[key] = where
    return _class_cache[key]


def bcp(ball, lam, len_cap, start=0):
    """(a1, a2) over pairs of λ-bi-Lipschitz paths without backtracking from start
    whose ends are at word distance at most one."""
    R = rel_graph(ball)
    DR = apsp(R, ball.n)
    DS = apsp(s_graph(ball), ball.n)
    paths = []

    def grow(p):
        paths.append(tuple(p))
        if len(p) - 1 == len_cap:
            return
        for v in sorted(R.neighbors(p[-1])):
            q = p + [v]
            if all(DR[q[i], v] * lam >= len(q) - 1 - i for i in range(len(q) - 1)):
                grow(q)

    grow([start])
    comp = {}
    for p in paths:
        cs = components(ball, p)
        keys = [(i, c) for i, c, _, _ in cs]
        if len(keys) != len(set(keys)):
            continue
        comp[p] = {(i, c): (p[a], p[b]) for i, c, a, b in cs}
    a1 = a2 = 0
    for p, q in itertools.product(comp, repeat=2):
        if DS[p[-1], q[-1]] > 1:
            continue
        for key, (u, v) in comp[p].items():
            other = comp[q].get(key)
            if other is None:
                a1 = max(a1, int(DS[u, v]))
            else:
                a2 = max(a2, int(DS[u, other[0]]), int(DS[v, other[1]]))
    return a1, a2, len(comp)


def thin_nu(ball, relative):
    """Thinness with geodesics in the chosen graph and distances in the word metric,
    from all geodesics listed by networkx."""
    G = rel_graph(ball) if relative else s_graph(ball)
    DS = apsp(s_graph(ball), ball.n)
    n = ball.n
    # far[(u, v)][c] = max over geodesics γ from u to v of dist(c, γ)
    far = {}
    onpath = {}
    for u in range(n):
        for v in range(n):
            geos = list(nx.all_shortest_paths(G, u, v))
            far[u, v] = np.max([DS[:, list(g)].min(axis=1) for g in geos], axis=0)
            onpath[u, v] = sorted({c for g in geos for c in g})
    best = 0
    for x, y in itertools.product(range(n), repeat=2):
        for c in onpath[x, y]:
            for z in range(n):
                best = max(best, int(min(far[y, z][c], far[x, z][c])))
    return best
