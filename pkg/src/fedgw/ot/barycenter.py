"""GW barycenters under the squared loss."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..errors import ParameterError, PreconditionError
from ..graph import MetricMeasureSpace
from .gromov import SolverConfig, gw_solve

logger = logging.getLogger(__name__)


def random_cost(size: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    C = rng.random((size, size))
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 0.0)
    return C


def gw_barycenter(spaces: list, weights, size: int, cfg: Optional[SolverConfig] = None,
                  init: Optional[np.ndarray] = None, max_iter: int = 50, tol: float = 1e-7,
                  seed: int = 0, return_log: bool = False):
    """Fixed-size cost matrix minimizing the weighted GW to ``spaces``.

    Alternates couplings from the barycenter to each member with the
    closed-form squared-loss update ``sum_k w_k T_k C_k T_k' / (p p')`` under a
    uniform barycenter measure. The diagonal is reset to zero after each
    update so the result stays a valid cost matrix.

    Args:
        spaces: member MetricMeasureSpace objects.
        weights: simplex weights, one per member.
        size: number of barycenter points.
        init: optional starting cost matrix; random symmetric otherwise.
        max_iter: cap on block-coordinate sweeps.
        tol: stop once the largest entry change is below this.
    """
    if size < 1:
        raise ParameterError("barycenter size must be >= 1")
    if not spaces:
        raise PreconditionError("need at least one space")
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(spaces),) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise PreconditionError("weights must be a simplex vector with one entry per space")
    cfg = cfg or SolverConfig()
    p = np.full(size, 1.0 / size)
    C = random_cost(size, seed) if init is None else np.array(init, dtype=float)
    if C.shape != (size, size):
        raise PreconditionError(f"init has shape {C.shape}, expected {(size, size)}")
    history = []
    for it in range(1, max_iter + 1):
        bary = MetricMeasureSpace(C, p)
        acc = np.zeros((size, size))
        total = 0.0
        for wk, sp in zip(w, spaces):
            res = gw_solve(bary, sp, cfg)
            T = res.coupling.plan
            acc += wk * (T @ sp.cost @ T.T)
            total += wk * res.value
        history.append(total)
        C_new = acc / np.outer(p, p)
        C_new = np.maximum(0.5 * (C_new + C_new.T), 0.0)
        np.fill_diagonal(C_new, 0.0)
        change = float(np.abs(C_new - C).max())
        C = C_new
        if change <= tol:
            break
    else:
        logger.debug("barycenter stopped at max_iter=%d", max_iter)
    out = MetricMeasureSpace(C, p)
    return (out, history) if return_log else out
