"""Finite graph models of tree-graded spaces: checkers, projections and transforms."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra


class TreeGradedError(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class PieceSpace:
    """A connected weighted graph with a list of pieces (vertex sets)."""

    def __init__(self, graph: nx.Graph, pieces):
        if graph.number_of_nodes() == 0 or not nx.is_connected(graph):
            raise ValueError("graph must be nonempty and connected")
        for u, v, w in graph.edges(data="weight", default=1):
            if not w > 0:
                raise ValueError(f"edge ({u}, {v}) has nonpositive length")
        self.graph = graph
        self.pieces = [frozenset(p) for p in pieces]
        for k, p in enumerate(self.pieces):
            if not p or not p <= set(graph.nodes):
                raise ValueError(f"piece {k} is empty or has unknown vertices")
            if not nx.is_connected(graph.subgraph(p)):
                raise ValueError(f"piece {k} does not induce a connected subgraph")
        self.nodes = sorted(graph.nodes, key=_node_key)
        self.pos = {v: i for i, v in enumerate(self.nodes)}
        self._metric = None

    @property
    def metric(self) -> np.ndarray:
        if self._metric is None:
            n = len(self.nodes)
            rows, cols, data = [], [], []
            for u, v, w in self.graph.edges(data="weight", default=1):
                a, b = self.pos[u], self.pos[v]
                rows += [a, b]
                cols += [b, a]
                data += [w, w]
            A = csr_matrix((data, (rows, cols)), shape=(n, n))
            self._metric = dijkstra(A, directed=False)
        return self._metric

    def dist(self, u, v) -> float:
        return float(self.metric[self.pos[u], self.pos[v]])

    def to_json(self) -> str:
        return json.dumps({
            "vertices": self.nodes,
            "edges": [[u, v, w] for u, v, w in sorted(
                self.graph.edges(data="weight", default=1), key=lambda e: (_node_key(e[0]), _node_key(e[1])))],
            "pieces": [sorted(p, key=_node_key) for p in self.pieces],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PieceSpace":
        d = json.loads(text)
        G = nx.Graph()
        G.add_nodes_from(d["vertices"])
        for u, v, w in d["edges"]:
            G.add_edge(u, v, weight=w)
        return cls(G, d["pieces"])


def _node_key(v):
    return (0, v, "") if isinstance(v, (int, float)) else (1, 0, str(v))


def check_t1(X: PieceSpace):
    """Distinct pieces share at most one vertex. Returns ``(ok, witness)``."""
    owner = {}
    for k, p in enumerate(X.pieces):
        for v in p:
            owner.setdefault(v, []).append(k)
    shared = {}
    for v, ks in owner.items():
        for a in range(len(ks)):
            for b in range(a + 1, len(ks)):
                shared.setdefault((ks[a], ks[b]), set()).add(v)
    for (a, b), common in sorted(shared.items()):
        if len(common) > 1:
            return False, (a, b, sorted(common, key=_node_key))
    return True, None


@dataclass
class CycleCertificate:
    ok: bool
    cap: int
    cycles_checked: int
    witness: list = None


def check_t2(X: PieceSpace, cycle_cap: int) -> CycleCertificate:
    """Every simple cycle with at most ``cycle_cap`` edges lies in one piece."""
    count = 0
    for cyc in nx.simple_cycles(X.graph, length_bound=cycle_cap):
        count += 1
        s = set(cyc)
        if not any(s <= p for p in X.pieces):
            return CycleCertificate(False, cycle_cap, count, cyc)
    return CycleCertificate(True, cycle_cap, count)


def project_to_piece(X: PieceSpace, x, M, verify: bool = True):
    """The unique nearest vertex of piece M to x.

    With ``verify``, also checks that every geodesic from x to a vertex of M
    passes through the projection.
    """
    piece = X.pieces[M] if isinstance(M, int) else frozenset(M)
    if x in piece:
        return x
    row = X.metric[X.pos[x]]
    ds = sorted((row[X.pos[v]], _node_key(v), v) for v in piece)
    best = ds[0][0]
    tied = [v for d, _, v in ds if np.isclose(d, best)]
    if len(tied) > 1:
        raise TreeGradedError("nearest point is not unique", (tied[0], tied[1]))
    y = tied[0]
    if verify:
        H = X.graph.copy()
        H.remove_node(y)
        reach = nx.single_source_dijkstra_path_length(H, x, weight="weight")
        for v in piece:
            if v != y and v in reach and np.isclose(reach[v], row[X.pos[v]]):
                raise TreeGradedError("a geodesic to the piece avoids the projection", (y, v))
    return y


def canonical_pieces(graph: nx.Graph) -> PieceSpace:
    """Blocks of the graph (bridges are 2-vertex blocks) as pieces."""
    if graph.number_of_nodes() == 1:
        return PieceSpace(graph, [set(graph.nodes)])
    blocks = [frozenset(b) for b in nx.biconnected_components(graph)]
    blocks.sort(key=lambda b: sorted(_node_key(v) for v in b))
    return PieceSpace(graph, blocks)


def _recheck(X: PieceSpace, cycle_cap):
    cap = cycle_cap or X.graph.number_of_nodes()
    ok, wit = check_t1(X)
    if not ok:
        raise TreeGradedError("result violates the one-point intersection property", wit)
    cert = check_t2(X, cap)
    if not cert.ok:
        raise TreeGradedError("result has a cycle outside every piece", cert.witness)
    return X


def glue_pieces(X: PieceSpace, selection, cycle_cap: int = None) -> PieceSpace:
    """Replace the selected pieces by their union.

    ``selection`` is a set of piece indices, or a list of vertices forming a
    path, in which case the pieces containing its edges are selected.
    """
    if isinstance(selection, (list, tuple)):
        idx = set()
        for u, v in zip(selection, selection[1:]):
            hits = [k for k, p in enumerate(X.pieces) if u in p and v in p]
            if not hits:
                raise ValueError(f"path step ({u}, {v}) is in no piece")
            idx.update(hits)
    else:
        idx = set(selection)
    union = frozenset().union(*(X.pieces[k] for k in idx))
    if not nx.is_connected(X.graph.subgraph(union)):
        raise ValueError("selected pieces do not form a connected set")
    # the union takes the slot of the first selected piece
    first = min(idx)
    pieces = [union if k == first else p for k, p in enumerate(X.pieces) if k == first or k not in idx]
    return _recheck(PieceSpace(X.graph, pieces), cycle_cap)


def split_bouquet(X: PieceSpace, piece: int, cut, cycle_cap: int = None) -> PieceSpace:
    """Split a piece at a cut vertex into the pieces of its bouquet decomposition."""
    P = X.pieces[piece]
    if cut not in P:
        raise ValueError("cut vertex is not in the piece")
    H = X.graph.subgraph(P - {cut})
    comps = list(nx.connected_components(H))
    if len(comps) < 2:
        raise ValueError(f"{cut!r} is not a cut vertex of piece {piece}")
    new = [frozenset(c | {cut}) for c in comps]
    new.sort(key=lambda b: sorted(_node_key(v) for v in b))
    rest = [p for k, p in enumerate(X.pieces) if k != piece]
    return _recheck(PieceSpace(X.graph, rest + new), cycle_cap)


def random_cactus(rng: random.Random, max_vertices: int = 30, weighted: bool = False):
    """A random cactus with its cycles and bridges, as ``(graph, cycles, bridges)``."""
    G = nx.Graph()
    G.add_node(0)
    cycles, bridges = [], []
    n = 1
    while n < max_vertices:
        v = rng.randrange(n)
        if rng.random() < 0.4 or max_vertices - n < 2:
            G.add_edge(v, n, weight=rng.randint(1, 5) if weighted else 1)
            bridges.append(frozenset({v, n}))
            n += 1
        else:
            k = rng.randint(3, min(6, max_vertices - n + 1))
            ring = [v] + list(range(n, n + k - 1))
            for a, b in zip(ring, ring[1:] + ring[:1]):
                G.add_edge(a, b, weight=rng.randint(1, 5) if weighted else 1)
            cycles.append(frozenset(ring))
            n += k - 1
        if rng.random() < 0.08:
            break
    return G, cycles, bridges
