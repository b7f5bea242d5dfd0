"""Log-domain Sinkhorn scaling for entropic optimal transport."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from ..errors import NumericError, ParameterError
from .coupling import Coupling, round_to_marginals

logger = logging.getLogger(__name__)


def sinkhorn_log(log_kernel: np.ndarray, p: np.ndarray, q: np.ndarray, iters: int = 1000,
                 tol: float = 1e-9) -> tuple[np.ndarray, bool, int]:
    """Scale ``exp(log_kernel)`` to marginals ``p``, ``q`` with dual potentials.

    Returns the (unrounded) plan, a convergence flag and the iteration count.
    """
    logp, logq = np.log(p), np.log(q)
    f = np.zeros(p.size)
    g = np.zeros(q.size)
    converged = False
    it = 0
    for it in range(1, iters + 1):
        f = logp - logsumexp(log_kernel + g[None, :], axis=1)
        g = logq - logsumexp(log_kernel + f[:, None], axis=0)
        if it % 10 == 0 or it == iters:
            P = np.exp(log_kernel + f[:, None] + g[None, :])
            if np.abs(P.sum(axis=1) - p).max() <= tol:
                converged = True
                break
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
        raise NumericError("Sinkhorn potentials became non-finite")
    P = np.exp(log_kernel + f[:, None] + g[None, :])
    return P, converged, it


def sinkhorn(cost: np.ndarray, p: np.ndarray, q: np.ndarray, reg: float, iters: int = 1000,
             tol: float = 1e-9, log_prior: Optional[np.ndarray] = None) -> Coupling:
    """Entropic OT plan ``argmin <cost, T> + reg * KL(T | prior)``.

    The prior defaults to the all-ones kernel. The returned plan is rounded
    onto the coupling set, so its marginals are exact up to floating point
    even when the iteration budget runs out; in that case a warning is
    logged and ``coupling.converged`` is False.
    """
    if reg <= 0:
        raise ParameterError("reg must be > 0")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    log_kernel = -np.asarray(cost, dtype=float) / reg
    if log_prior is not None:
        log_kernel = log_kernel + log_prior
    P, converged, _ = sinkhorn_log(log_kernel, p, q, iters, tol)
    if not converged:
        logger.warning("sinkhorn hit %d iterations before reaching tol=%g", iters, tol)
    return Coupling(round_to_marginals(P, p, q), p, q, converged)
