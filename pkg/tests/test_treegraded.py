import itertools
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asymtree.treegraded import (
    PieceSpace,
    TreeGradedError,
    canonical_pieces,
    check_t1,
    check_t2,
    glue_pieces,
    project_to_piece,
    random_cactus,
    split_bouquet,
)


def cycle(nodes):
    G = nx.Graph()
    nx.add_cycle(G, nodes)
    return G


def figure_eight():
    return nx.compose(cycle([0, 1, 2]), cycle([0, 3, 4, 5]))


def chain_of_cycles():
    return nx.compose_all([cycle([0, 1, 2, 3]), cycle([3, 4, 5]), cycle([5, 6, 7, 8])])


def brute_projection(X, x, piece):
    ds = {v: X.dist(x, v) for v in piece}
    best = min(ds.values())
    return [v for v, d in ds.items() if np.isclose(d, best)]


def test_t1_examples():
    G = nx.compose(cycle([0, 1, 2]), cycle([0, 3, 4]))
    assert check_t1(PieceSpace(G, [{0, 1, 2}, {0, 3, 4}])) == (True, None)
    H = nx.compose(cycle([0, 1, 2, 3]), cycle([0, 1, 4, 5]))
    ok, wit = check_t1(PieceSpace(H, [{0, 1, 2, 3}, {0, 1, 4, 5}]))
    assert not ok and wit == (0, 1, [0, 1])
    assert check_t1(PieceSpace(H, [set(H.nodes)]))[0]


def test_t2_examples():
    X = PieceSpace(figure_eight(), [{0, 1, 2}, {0, 3, 4, 5}])
    cert = check_t2(X, 6)
    assert cert.ok and cert.cap == 6 and cert.cycles_checked == 2
    Y = PieceSpace(cycle([0, 1, 2, 3]), [{0, 1}, {2, 3}])
    cert = check_t2(Y, 4)
    assert not cert.ok and sorted(cert.witness) == [0, 1, 2, 3]
    T = nx.balanced_tree(2, 3)
    assert check_t2(PieceSpace(T, [{v} for v in T.nodes]), 10).ok


def test_t2_cap_is_relative():
    Y = PieceSpace(cycle(range(6)), [{0, 1}])
    # the only cycle is longer than the cap, so the capped certificate passes
    assert check_t2(Y, 5).ok
    assert not check_t2(Y, 6).ok


def test_projection_examples():
    X = canonical_pieces(nx.compose(cycle([0, 1, 2]), nx.compose(nx.path_graph([2, 6]), cycle([6, 7, 8, 9]))))
    B = next(k for k, p in enumerate(X.pieces) if p == {6, 7, 8, 9})
    assert project_to_piece(X, 1, B) == 6
    assert project_to_piece(X, 7, B) == 7
    # a 5-cycle: the vertex opposite an edge is equidistant from both its ends
    Y = PieceSpace(cycle(range(5)), [{0, 1}])
    with pytest.raises(TreeGradedError) as e:
        project_to_piece(Y, 3, 0)
    assert set(e.value.witness) == {0, 1}


def test_projection_flags_bypassing_geodesics():
    # y is the unique nearest point of M = {y, v}, but the direct edge x-v is
    # also a geodesic to M and avoids y
    G = nx.Graph()
    G.add_edge("x", "y", weight=1)
    G.add_edge("y", "v", weight=2)
    G.add_edge("x", "v", weight=3)
    X = PieceSpace(G, [{"y", "v"}])
    assert project_to_piece(X, "x", 0, verify=False) == "y"
    with pytest.raises(TreeGradedError) as e:
        project_to_piece(X, "x", 0)
    assert e.value.witness == ("y", "v")


def test_canonical_examples():
    assert {frozenset(p) for p in canonical_pieces(figure_eight()).pieces} == \
        {frozenset({0, 1, 2}), frozenset({0, 3, 4, 5})}
    T = nx.balanced_tree(2, 2)
    assert {frozenset(p) for p in canonical_pieces(T).pieces} == {frozenset(e) for e in T.edges}
    C = cycle(range(7))
    assert canonical_pieces(C).pieces == [frozenset(range(7))]
    single = nx.Graph()
    single.add_node(0)
    assert canonical_pieces(single).pieces == [frozenset({0})]


def test_glue_examples():
    X = canonical_pieces(figure_eight())
    Y = glue_pieces(X, {0, 1})
    assert Y.pieces == [frozenset(range(6))]
    assert glue_pieces(X, {0}).pieces == X.pieces
    Z = canonical_pieces(chain_of_cycles())
    i = next(k for k, p in enumerate(Z.pieces) if p == {0, 1, 2, 3})
    j = next(k for k, p in enumerate(Z.pieces) if p == {3, 4, 5})
    W = glue_pieces(Z, {i, j})
    assert len(W.pieces) == 2
    assert frozenset(range(6)) in W.pieces
    # selection by a path through the first two cycles
    assert set(glue_pieces(Z, [0, 3, 4]).pieces) == set(W.pieces)


def test_glue_disconnected_selection():
    Z = canonical_pieces(chain_of_cycles())
    i = next(k for k, p in enumerate(Z.pieces) if p == {0, 1, 2, 3})
    j = next(k for k, p in enumerate(Z.pieces) if p == {5, 6, 7, 8})
    with pytest.raises(ValueError):
        glue_pieces(Z, {i, j})


def test_split_examples():
    X = PieceSpace(figure_eight(), [set(range(6))])
    Y = split_bouquet(X, 0, 0)
    assert set(Y.pieces) == {frozenset({0, 1, 2}), frozenset({0, 3, 4, 5})}
    with pytest.raises(ValueError):
        split_bouquet(PieceSpace(cycle(range(5)), [set(range(5))]), 0, 0)
    G = nx.compose(figure_eight(), nx.path_graph([5, 9, 10]))
    Z = glue_pieces(canonical_pieces(G), {0, 1})
    k = Z.pieces.index(frozenset(range(6)))
    S = split_bouquet(Z, k, 0)
    assert frozenset({0, 1, 2}) in S.pieces and frozenset({5, 9}) in S.pieces


def test_json_round_trip():
    X = canonical_pieces(chain_of_cycles())
    Y = PieceSpace.from_json(X.to_json())
    assert Y.pieces == X.pieces
    assert np.array_equal(Y.metric, X.metric)


def test_piece_space_validation():
    with pytest.raises(ValueError):
        PieceSpace(nx.empty_graph(2), [{0}])
    with pytest.raises(ValueError):
        PieceSpace(nx.path_graph(3), [{0, 2}])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_random_cactus_decomposition(seed, weighted):
    G, cycles, bridges = random_cactus(random.Random(seed), 20, weighted)
    X = canonical_pieces(G)
    assert set(X.pieces) == set(cycles) | set(bridges) or G.number_of_nodes() == 1
    assert check_t1(X)[0]
    assert check_t2(X, G.number_of_nodes()).ok
    for k, p in enumerate(X.pieces):
        for x in G.nodes:
            tied = brute_projection(X, x, p)
            assert len(tied) == 1
            assert project_to_piece(X, x, k) == tied[0]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_canonical_is_coarsest(seed):
    G, cycles, bridges = random_cactus(random.Random(seed), 16)
    X = canonical_pieces(G)
    big = [k for k, p in enumerate(X.pieces) if len(p) > 1]
    for i, j in itertools.combinations(big, 2):
        union = X.pieces[i] | X.pieces[j]
        H = G.subgraph(union)
        if X.pieces[i] & X.pieces[j]:
            assert nx.is_connected(H)
            assert list(nx.articulation_points(H))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_alternating_concatenation_is_geodesic(seed):
    # a geodesic from x to y passes through the projections of x and y onto
    # each piece it crosses, so its length is the sum of the pieces' parts
    rng = random.Random(seed)
    G, _, _ = random_cactus(rng, 20, weighted=True)
    X = canonical_pieces(G)
    nodes = sorted(G.nodes)
    for _ in range(10):
        x, y = rng.choice(nodes), rng.choice(nodes)
        path = nx.shortest_path(G, x, y, weight="weight")
        total = 0.0
        for k, p in enumerate(X.pieces):
            if x in p and y in p:
                continue
            inside = [v for v in path if v in p]
            if len(inside) >= 2:
                u, v = inside[0], inside[-1]
                assert project_to_piece(X, x, k) == u
                assert project_to_piece(X, y, k) == v
                total += X.dist(u, v)
        if not any(x in p and y in p for p in X.pieces):
            assert np.isclose(total, X.dist(x, y))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_connected_set_meeting_piece_once_projects_to_point(seed):
    rng = random.Random(seed)
    G, _, _ = random_cactus(rng, 16)
    X = canonical_pieces(G)
    for k, p in enumerate(X.pieces):
        H = G.subgraph(set(G.nodes) - p)
        for comp in nx.connected_components(H):
            projs = {project_to_piece(X, x, k) for x in comp}
            assert len(projs) == 1


def test_quadrilaterals_lie_in_one_piece():
    G = nx.compose(chain_of_cycles(), nx.path_graph([8, 10, 11]))
    X = canonical_pieces(G)
    diam = int(X.metric.max())
    assert check_t2(X, 4 * diam).ok
