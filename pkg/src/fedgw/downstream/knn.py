"""k-nearest-neighbour classification over a precomputed distance matrix."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError


def knn_classify(distances, train_idx, train_labels, test_idx, k: int) -> np.ndarray:
    """Majority vote among the ``k`` nearest training items.

    Ties go to the label with the smaller mean distance among its voters, then
    to the smaller label. Equal distances are ordered by training position.
    """
    D = np.asarray(distances, dtype=float)
    train_idx = np.asarray(train_idx, dtype=int)
    train_labels = np.asarray(train_labels)
    if not 1 <= k <= train_idx.size:
        raise ParameterError(f"k must lie in [1, {train_idx.size}]")
    out = []
    for t in np.asarray(test_idx, dtype=int):
        d = D[t, train_idx]
        near = np.argsort(d, kind="stable")[:k]
        best = None
        for lab in np.unique(train_labels[near]):
            mask = train_labels[near] == lab
            key = (-int(mask.sum()), float(d[near][mask].mean()), lab)
            if best is None or key < best:
                best = key
        out.append(best[2])
    return np.array(out)
