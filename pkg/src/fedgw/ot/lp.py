"""Exact linear OT (the Frank-Wolfe linear minimization oracle)."""

from __future__ import annotations

import os
import sys

import numpy as np

if "ot" not in sys.modules:
    # POT probes every installed tensor backend on import; only numpy is used here.
    for _key in ("PYTORCH", "JAX", "TENSORFLOW", "CUPY"):
        os.environ.setdefault(f"POT_BACKEND_DISABLE_{_key}", "1")

try:
    from ot.lp import emd as _emd
except ImportError:  # pragma: no cover - exercised only without POT
    _emd = None


def _linprog_ot(cost, p, q):
    from scipy.optimize import linprog
    from scipy.sparse import kron, eye, csr_matrix

    n, m = cost.shape
    A = csr_matrix(np.vstack([
        kron(eye(n), np.ones((1, m))).toarray(),
        kron(np.ones((1, n)), eye(m)).toarray(),
    ]))
    res = linprog(cost.ravel(), A_eq=A, b_eq=np.concatenate([p, q]), bounds=(0, None), method="highs-ds")
    return res.x.reshape(n, m)


def exact_ot(cost: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vertex solution of ``min <cost, T>`` over couplings of ``p`` and ``q``.

    Uses POT's network simplex when available and HiGHS dual simplex
    otherwise; both return a basic feasible solution, which matters when the
    cost is flat over the whole coupling set.
    """
    cost = np.ascontiguousarray(cost, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    # both sides must carry the same mass to the last bit for network simplex
    q = q * (p.sum() / q.sum())
    if _emd is not None:
        T = _emd(p, q, cost, numItermax=1_000_000)
    else:
        T = _linprog_ot(cost, p, q)
    return np.maximum(T, 0.0)
