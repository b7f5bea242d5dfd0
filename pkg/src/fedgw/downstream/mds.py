"""Classical multidimensional scaling for plotting distance matrices."""

from __future__ import annotations

import numpy as np


def classical_mds(distances, dims: int = 2) -> np.ndarray:
    """Coordinates whose Euclidean distances approximate ``distances``.

    Double-centres the squared distances and keeps the top ``dims``
    eigenpairs; negative eigenvalues (non-Euclidean input) contribute zeros.
    """
    D = np.asarray(distances, dtype=float)
    n = D.shape[0]
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D * D) @ J
    w, V = np.linalg.eigh(0.5 * (B + B.T))
    order = np.argsort(w)[::-1][:dims]
    X = V[:, order] * np.sqrt(np.maximum(w[order], 0.0))
    if X.shape[1] < dims:
        X = np.hstack([X, np.zeros((n, dims - X.shape[1]))])
    return X
