"""Exact graph edit distance by enumerating node correspondences."""

from __future__ import annotations

import itertools

import numpy as np

from ..errors import SizeCapError
from ..graph import Graph

DEFAULT_CAP = 8


def _padded(g: Graph, size: int):
    A = np.zeros((size, size), dtype=np.int8)
    A[: g.node_count, : g.node_count] = g.adjacency()
    labels = np.full(size, -2, dtype=np.int64)  # -2 marks padding
    labels[: g.node_count] = g.node_labels if g.node_labels is not None else -1
    return A, labels


def ged_bruteforce(g1: Graph, g2: Graph, max_nodes: int = DEFAULT_CAP) -> int:
    """Minimum unit-cost edit distance between two small graphs.

    Both graphs are padded with placeholder nodes to a common size and every
    bijection is scored: mapping a real node to a placeholder is a deletion
    (or insertion), mapping real nodes with different labels a substitution,
    and each node pair whose edge status differs costs one edge edit.
    Padding to the larger size suffices because a substitution never costs
    more than a deletion plus an insertion.
    """
    n = max(g1.node_count, g2.node_count)
    if n > max_nodes:
        raise SizeCapError(f"graphs with {n} nodes exceed the brute-force cap of {max_nodes}")
    A1, l1 = _padded(g1, n)
    A2, l2 = _padded(g2, n)
    iu = np.triu_indices(n, k=1)
    best = None
    chunk = []
    for perm in itertools.permutations(range(n)):
        chunk.append(perm)
        if len(chunk) == 5040:
            best = _score(chunk, A1, l1, A2, l2, iu, best)
            chunk = []
    if chunk:
        best = _score(chunk, A1, l1, A2, l2, iu, best)
    return int(best)


def _score(chunk, A1, l1, A2, l2, iu, best):
    P = np.array(chunk)
    node = (l1[None, :] != l2[P]).sum(axis=1)
    mapped = A2[P[:, :, None], P[:, None, :]]
    edge = (mapped[:, iu[0], iu[1]] != A1[iu]).sum(axis=1)
    m = int((node + edge).min())
    return m if best is None else min(best, m)
