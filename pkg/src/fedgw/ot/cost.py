"""Intra-graph cost matrices built from node embeddings."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..graph import MetricMeasureSpace

EUCLIDEAN = "euclidean"
COSINE = "cosine"


def pairwise_distances(X: np.ndarray, metric: str = EUCLIDEAN) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if metric == EUCLIDEAN:
        sq = (X * X).sum(axis=1)
        D2 = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
        D = np.sqrt(np.maximum(D2, 0.0))
    elif metric == COSINE:
        norms = np.linalg.norm(X, axis=1)
        nz = norms > 0
        U = np.zeros_like(X)
        U[nz] = X[nz] / norms[nz, None]
        D = np.clip(1.0 - U @ U.T, 0.0, 2.0)
        # zero rows: distance 1 to nonzero rows, 0 to each other
        D[~nz, :] = 1.0
        D[:, ~nz] = 1.0
        D[np.ix_(~nz, ~nz)] = 0.0
    else:
        raise ParameterError(f"unknown metric {metric!r}")
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def cost_from_embedding(H, metric: str = EUCLIDEAN) -> MetricMeasureSpace:
    """Metric-measure space of an embedding: row distances, uniform node measure.

    Accepts an ``EmbeddingMatrix``, an ``EncodedEmbedding`` or a bare array.
    """
    values = getattr(H, "values", H)
    return MetricMeasureSpace.uniform(pairwise_distances(values, metric))
