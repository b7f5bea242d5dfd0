"""Dataset ingestion (TU text format, plain edge lists) and synthetic generators."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import FormatError, LoadError
from .graph import DatasetBundle, Graph, khop_subgraph, one_hot

logger = logging.getLogger(__name__)


def _read_lines(path: Path) -> list[str]:
    if not path.is_file():
        raise LoadError(f"missing file: {path}")
    with open(path) as fh:
        return [ln.strip() for ln in fh if ln.strip()]


def _read_ints(path: Path) -> list[int]:
    out = []
    for lineno, ln in enumerate(_read_lines(path), start=1):
        try:
            out.append(int(float(ln)))
        except ValueError:
            raise FormatError(f"{path.name}:{lineno}: expected an integer, got {ln!r}") from None
    return out


def load_tu_dataset(directory, name: str, one_hot_labels: bool = False) -> DatasetBundle:
    """Read a dataset in the TU benchmark text format.

    Args:
        directory: Folder holding ``{name}_A.txt`` and friends.
        name: Dataset prefix, e.g. ``"MUTAG"``.
        one_hot_labels: Append one-hot node labels to the node features.

    Returns:
        DatasetBundle with 0-indexed local node ids per graph.
    """
    d = Path(directory)
    indicator = _read_ints(d / f"{name}_graph_indicator.txt")
    graph_labels = _read_ints(d / f"{name}_graph_labels.txt")
    edge_lines = _read_lines(d / f"{name}_A.txt")

    node_labels = None
    if (d / f"{name}_node_labels.txt").is_file():
        node_labels = np.array(_read_ints(d / f"{name}_node_labels.txt"), dtype=np.int64)
        if node_labels.size != len(indicator):
            raise FormatError(f"{name}_node_labels.txt has {node_labels.size} lines, expected {len(indicator)}")
    attributes = None
    attr_path = d / f"{name}_node_attributes.txt"
    if attr_path.is_file():
        rows = []
        for lineno, ln in enumerate(_read_lines(attr_path), start=1):
            try:
                rows.append([float(x) for x in ln.split(",")])
            except ValueError:
                raise FormatError(f"{attr_path.name}:{lineno}: bad attribute row") from None
        if len({len(r) for r in rows}) > 1:
            raise FormatError(f"{attr_path.name}: ragged attribute rows")
        attributes = np.array(rows)
        if attributes.shape[0] != len(indicator):
            raise FormatError(f"{attr_path.name} has {attributes.shape[0]} rows, expected {len(indicator)}")

    ind = np.array(indicator, dtype=np.int64)
    num_graphs = len(graph_labels)
    if ind.min() < 1 or ind.max() > num_graphs:
        raise FormatError(f"graph indicator references graphs outside [1, {num_graphs}]")
    if np.any(np.diff(ind) < 0):
        raise FormatError("graph indicator must be non-decreasing")
    starts = np.searchsorted(ind, np.arange(1, num_graphs + 2))
    if np.any(np.diff(starts) == 0):
        raise FormatError("a graph id has no nodes (empty graphs are rejected)")

    edges = [[] for _ in range(num_graphs)]
    for lineno, ln in enumerate(edge_lines, start=1):
        parts = ln.replace(",", " ").split()
        if len(parts) != 2:
            raise FormatError(f"{name}_A.txt:{lineno}: expected 'i, j'")
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
        except ValueError:
            raise FormatError(f"{name}_A.txt:{lineno}: node ids must be integers") from None
        if not (0 <= i < ind.size and 0 <= j < ind.size):
            raise FormatError(f"{name}_A.txt:{lineno}: node id out of range")
        gi, gj = ind[i], ind[j]
        if gi != gj:
            raise FormatError(f"{name}_A.txt:{lineno}: edge crosses graphs {gi} and {gj}")
        if i == j:
            raise FormatError(f"{name}_A.txt:{lineno}: self-loop")
        off = starts[gi - 1]
        edges[gi - 1].append((i - off, j - off))

    num_classes = 0 if node_labels is None else int(node_labels.max()) + 1
    graphs = []
    for k in range(num_graphs):
        lo, hi = starts[k], starts[k + 1]
        feats = np.zeros((hi - lo, 0)) if attributes is None else attributes[lo:hi]
        labels = None if node_labels is None else node_labels[lo:hi]
        if one_hot_labels and labels is not None:
            feats = np.hstack([feats, one_hot(labels, num_classes)])
        graphs.append(Graph(hi - lo, edges[k], feats, labels, graph_labels[k]))
    logger.info("loaded %s: %d graphs", name, num_graphs)
    return DatasetBundle(graphs, name, num_classes)


def save_tu_dataset(bundle: DatasetBundle, directory, name: Optional[str] = None,
                    write_features: bool = True) -> None:
    """Write ``bundle`` in TU text format (each edge in both orientations)."""
    name = name or bundle.name
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    a_lines, ind_lines, nl_lines, attr_lines = [], [], [], []
    offset = 0
    for gid, g in enumerate(bundle.graphs, start=1):
        for u, v in g.sorted_edges():
            a_lines.append(f"{u + offset + 1}, {v + offset + 1}")
            a_lines.append(f"{v + offset + 1}, {u + offset + 1}")
        ind_lines.extend([str(gid)] * g.node_count)
        if g.node_labels is not None:
            nl_lines.extend(str(int(x)) for x in g.node_labels)
        if g.features.shape[1]:
            attr_lines.extend(", ".join(repr(float(x)) for x in row) for row in g.features)
        offset += g.node_count
    (d / f"{name}_A.txt").write_text("\n".join(a_lines) + "\n")
    (d / f"{name}_graph_indicator.txt").write_text("\n".join(ind_lines) + "\n")
    (d / f"{name}_graph_labels.txt").write_text(
        "\n".join(str(g.graph_label if g.graph_label is not None else 0) for g in bundle.graphs) + "\n")
    if nl_lines:
        (d / f"{name}_node_labels.txt").write_text("\n".join(nl_lines) + "\n")
    if write_features and attr_lines:
        (d / f"{name}_node_attributes.txt").write_text("\n".join(attr_lines) + "\n")


def load_edge_list_graph(edges_path, features_path=None, labels_path=None) -> Graph:
    """Single graph from a ``u v`` edge list plus optional CSV features and labels."""
    edges = []
    max_id = -1
    for lineno, ln in enumerate(_read_lines(Path(edges_path)), start=1):
        parts = ln.replace(",", " ").split()
        if len(parts) != 2:
            raise FormatError(f"{Path(edges_path).name}:{lineno}: expected 'u v'")
        u, v = int(parts[0]), int(parts[1])
        if u < 0 or v < 0:
            raise FormatError(f"{Path(edges_path).name}:{lineno}: negative node id")
        edges.append((u, v))
        max_id = max(max_id, u, v)

    feats = None
    if features_path:
        rows = [[float(x) for x in ln.split(",")] for ln in _read_lines(Path(features_path))]
        if len({len(r) for r in rows}) > 1:
            raise FormatError(f"{Path(features_path).name}: ragged feature rows")
        if rows:
            feats = np.array(rows)
            max_id = max(max_id, len(rows) - 1)
    labels = None
    if labels_path:
        labels = np.array(_read_ints(Path(labels_path)), dtype=np.int64)
        max_id = max(max_id, labels.size - 1)

    n = max_id + 1
    if n < 1:
        raise FormatError("edge list graph has no nodes")
    if feats is None:
        feats = np.zeros((n, 0))
    elif feats.shape[0] != n:
        raise FormatError(f"feature file has {feats.shape[0]} rows for {n} nodes")
    if labels is not None and labels.size != n:
        raise FormatError(f"label file has {labels.size} entries for {n} nodes")
    return Graph(n, edges, feats, labels)


def planted_citation_graph(n_nodes: int = 600, n_classes: int = 6, avg_degree: float = 3.5,
                           homophily: float = 0.75, n_features: int = 64,
                           seed: int = 0) -> Graph:
    """Sparse labelled graph with class-correlated binary features.

    A stand-in for citation benchmarks: edges follow a planted partition with
    the given within-class edge fraction, features are bag-of-words style
    indicators drawn from class-specific vocabularies.
    """
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, n_classes, size=n_nodes)
    n_edges = int(round(avg_degree * n_nodes / 2))
    by_class = [np.flatnonzero(labels == c) for c in range(n_classes)]
    edges = set()
    while len(edges) < n_edges:
        u = int(rng.integers(n_nodes))
        if rng.random() < homophily:
            pool = by_class[labels[u]]
            v = int(pool[rng.integers(pool.size)])
        else:
            v = int(rng.integers(n_nodes))
        if u != v:
            edges.add((min(u, v), max(u, v)))
    vocab = rng.random((n_classes, n_features)) < 0.15
    p_word = np.where(vocab[labels], 0.35, 0.03)
    feats = (rng.random((n_nodes, n_features)) < p_word).astype(float)
    return Graph(n_nodes, sorted(edges), feats, labels)


def khop_bundle(g: Graph, centers, k: int = 1, name: str = "subgraphs") -> DatasetBundle:
    """Bundle of k-hop subgraphs, pseudo-labelled by their center nodes."""
    graphs = [khop_subgraph(g, int(c), k)[0] for c in centers]
    num_classes = 1 + max(int(s.node_labels.max()) for s in graphs)
    return DatasetBundle(graphs, name, num_classes)


def two_class_graphs(n_per_class: int = 20, seed: int = 0) -> DatasetBundle:
    """Planted two-class dataset: cycles versus stars with a few random chords.

    Node labels are the degree bucket (0 leaf-like, 1 hub-like) so both GW on
    APSP and learned embeddings can separate the classes.
    """
    rng = np.random.default_rng(seed)
    graphs = []
    for cls in (0, 1):
        for _ in range(n_per_class):
            n = int(rng.integers(6, 11))
            if cls == 0:
                edges = [(i, (i + 1) % n) for i in range(n)]
            else:
                edges = [(0, i) for i in range(1, n)]
            if rng.random() < 0.5:
                u, v = rng.choice(n, size=2, replace=False)
                edges.append((int(u), int(v)))
            g = Graph(n, edges)
            labels = (g.degrees() > 2).astype(np.int64)
            graphs.append(Graph(n, g.edges, one_hot(labels, 2), labels, cls))
    return DatasetBundle(graphs, "two_class", 2)
