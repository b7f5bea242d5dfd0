"""Core graph containers, k-hop subgraph extraction and geodesic cost matrices."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import FormatError, PreconditionError

MEASURE_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _canonical_edges(edges: Iterable[tuple[int, int]], n: int) -> frozenset:
    out = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise FormatError(f"self-loop on node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"edge ({u}, {v}) references a node outside [0, {n})")
        out.add((u, v) if u < v else (v, u))
    return frozenset(out)


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with optional node features and labels.

    Edges are stored as ``(u, v)`` pairs with ``u < v``. ``features`` always
    has ``node_count`` rows; a graph without features carries an ``n x 0``
    matrix.
    """

    node_count: int
    edges: frozenset = field(default_factory=frozenset)
    features: np.ndarray = None
    node_labels: Optional[np.ndarray] = None
    graph_label: Optional[int] = None

    def __post_init__(self):
        n = int(self.node_count)
        if n < 1:
            raise FormatError("graphs must have at least one node")
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "edges", _canonical_edges(self.edges, n))
        feats = np.zeros((n, 0)) if self.features is None else np.asarray(self.features, dtype=float)
        if feats.ndim != 2 or feats.shape[0] != n:
            raise FormatError(f"features must have {n} rows, got shape {feats.shape}")
        object.__setattr__(self, "features", _frozen(feats))
        if self.node_labels is not None:
            labels = np.asarray(self.node_labels, dtype=np.int64)
            if labels.shape != (n,):
                raise FormatError(f"node_labels must have length {n}, got {labels.shape}")
            if labels.size and labels.min() < 0:
                raise FormatError("node labels must be nonnegative")
            object.__setattr__(self, "node_labels", _frozen(labels))
        if self.graph_label is not None:
            object.__setattr__(self, "graph_label", int(self.graph_label))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency matrix."""
        A = np.zeros((self.node_count, self.node_count))
        for u, v in self.edges:
            A[u, v] = A[v, u] = 1.0
        return A

    def neighbors(self) -> list[list[int]]:
        """Adjacency lists, each sorted ascending."""
        nbrs = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return [sorted(x) for x in nbrs]

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def induced(self, nodes: list[int]) -> "Graph":
        """Induced subgraph; ``nodes[k]`` becomes local id ``k``."""
        index = {int(u): k for k, u in enumerate(nodes)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        idx = np.asarray(nodes, dtype=np.int64)
        return Graph(
            node_count=len(nodes),
            edges=edges,
            features=self.features[idx],
            node_labels=None if self.node_labels is None else self.node_labels[idx],
            graph_label=self.graph_label,
        )

    def with_features(self, features: np.ndarray) -> "Graph":
        return Graph(self.node_count, self.edges, features, self.node_labels, self.graph_label)

    def permuted(self, perm) -> "Graph":
        """Relabel nodes so that old node ``i`` becomes ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        inv = np.argsort(perm)
        return Graph(
            node_count=self.node_count,
            edges=[(perm[u], perm[v]) for u, v in self.edges],
            features=self.features[inv],
            node_labels=None if self.node_labels is None else self.node_labels[inv],
            graph_label=self.graph_label,
        )


@dataclass(frozen=True, eq=False)
class MetricMeasureSpace:
    """Square cost matrix paired with a probability vector over its points."""

    cost: np.ndarray
    measure: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.cost, dtype=float)
        p = np.asarray(self.measure, dtype=float)
        if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] < 1:
            raise PreconditionError(f"cost must be a non-empty square matrix, got {C.shape}")
        if p.shape != (C.shape[0],):
            raise PreconditionError("measure length must match cost size")
        if np.any(p <= 0):
            raise PreconditionError("measure entries must be positive")
        if abs(p.sum() - 1.0) > MEASURE_TOL:
            raise PreconditionError(f"measure sums to {p.sum():.15g}, not 1")
        if np.any(C < 0) or np.any(np.diag(C) != 0):
            raise PreconditionError("cost must be nonnegative with a zero diagonal")
        if not np.allclose(C, C.T, rtol=0, atol=1e-12):
            raise PreconditionError("cost must be symmetric")
        object.__setattr__(self, "cost", _frozen(C))
        object.__setattr__(self, "measure", _frozen(p))

    @property
    def size(self) -> int:
        return self.cost.shape[0]

    @classmethod
    def uniform(cls, cost) -> "MetricMeasureSpace":
        cost = np.asarray(cost, dtype=float)
        n = cost.shape[0]
        return cls(cost, np.full(n, 1.0 / n))

    def is_uniform(self) -> bool:
        return bool(np.all(self.measure == self.measure[0]))

    def permuted(self, perm) -> "MetricMeasureSpace":
        """Space with point ``i`` moved to position ``perm[i]``."""
        inv = np.argsort(np.asarray(perm))
        return MetricMeasureSpace(self.cost[np.ix_(inv, inv)], self.measure[inv])


@dataclass
class DatasetBundle:
    graphs: list
    name: str
    num_node_classes: int

    def __post_init__(self):
        labelled = [g.node_labels for g in self.graphs if g.node_labels is not None]
        expected = 1 + max(int(l.max()) for l in labelled) if labelled else 0
        if self.num_node_classes != expected:
            raise FormatError(
                f"num_node_classes={self.num_node_classes} but labels imply {expected}"
            )

    def __len__(self):
        return len(self.graphs)

    @property
    def graph_labels(self) -> np.ndarray:
        return np.array([g.graph_label for g in self.graphs])

    @property
    def mean_node_count(self) -> float:
        return float(np.mean([g.node_count for g in self.graphs]))


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.size, num_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def degree_one_hot(g: Graph, max_degree: int) -> np.ndarray:
    """One-hot degree encoding with degrees above ``max_degree`` collapsed."""
    return one_hot(np.minimum(g.degrees(), max_degree), max_degree + 1)


def bfs_distances(g: Graph, source: int, nbrs=None) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes get -1."""
    nbrs = g.neighbors() if nbrs is None else nbrs
    dist = np.full(g.node_count, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in nbrs[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def khop_subgraph(g: Graph, center: int, k: int) -> tuple[Graph, int]:
    """Induced subgraph on nodes within ``k`` hops of ``center``.

    The center becomes local node 0; remaining nodes follow in BFS order with
    neighbors visited by ascending id. Returns the subgraph and the center's
    label as pseudo-label.
    """
    if g.node_labels is None:
        raise PreconditionError("khop_subgraph needs node labels for the pseudo-label")
    if not 0 <= center < g.node_count:
        raise PreconditionError(f"center {center} outside [0, {g.node_count})")
    if k < 1:
        raise PreconditionError("k must be >= 1")
    nbrs = g.neighbors()
    order = [center]
    depth = {center: 0}
    queue = deque([center])
    while queue:
        u = queue.popleft()
        if depth[u] == k:
            continue
        for v in nbrs[u]:
            if v not in depth:
                depth[v] = depth[u] + 1
                order.append(v)
                queue.append(v)
    sub = g.induced(order)
    label = int(g.node_labels[center])
    sub = Graph(sub.node_count, sub.edges, sub.features, sub.node_labels, graph_label=label)
    return sub, label


def apsp(g: Graph) -> MetricMeasureSpace:
    """Unweighted all-pairs shortest paths with uniform node measure.

    Pairs in different components get cost ``n``, one more than the longest
    possible path.
    """
    n = g.node_count
    nbrs = g.neighbors()
    C = np.empty((n, n))
    for s in range(n):
        d = bfs_distances(g, s, nbrs).astype(float)
        d[d < 0] = n
        C[s] = d
    return MetricMeasureSpace.uniform(C)
