"""Binary kernel SVM trained by SMO on a precomputed (possibly indefinite) kernel."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, PreconditionError

logger = logging.getLogger(__name__)

TAU = 1e-12


def gw_kernel(distances: np.ndarray, gamma: float) -> np.ndarray:
    """``exp(-gamma * distances)`` with an exact unit diagonal for square inputs."""
    if gamma <= 0:
        raise ParameterError("gamma must be > 0")
    D = np.asarray(distances, dtype=float)
    if np.any(D < 0):
        raise PreconditionError("distances must be nonnegative")
    K = np.exp(-gamma * D)
    if D.ndim == 2 and D.shape[0] == D.shape[1] and np.all(np.diag(D) == 0):
        np.fill_diagonal(K, 1.0)
    return K


def kernel_fingerprint(K: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(K, dtype=float).tobytes()).hexdigest()[:16]


@dataclass(eq=False)
class SvmModel:
    dual_coefs: np.ndarray
    support_indices: np.ndarray
    bias: float
    gamma: float
    penalty: float
    train_kernel_fingerprint: str
    converged: bool = True
    iterations: int = 0


def _bias(alpha, y, G, C):
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yG[free].mean())
    else:
        at_upper = alpha >= C
        at_lower = ~at_upper
        # bounds on rho from the KKT conditions of bounded variables
        up = np.where((at_upper & (y == -1)) | (at_lower & (y == 1)), yG, np.inf).min()
        lo = np.where((at_upper & (y == 1)) | (at_lower & (y == -1)), yG, -np.inf).max()
        rho = float((up + lo) / 2) if np.isfinite(up) and np.isfinite(lo) else float(
            up if np.isfinite(up) else lo)
    return -rho


def svm_train(K: np.ndarray, labels, penalty: float, gamma: float = float("nan"),
              tol: float = 1e-3, max_iter: int = 100_000) -> SvmModel:
    """Solve the C-SVM dual with second-order working-set selection.

    The kernel is used as given; non-positive curvature along a working pair
    is replaced by a tiny constant so each step still makes progress.

    Args:
        K: square training kernel.
        labels: +-1 vector.
        penalty: box constraint C.
        gamma: recorded in the model (the kernel is already built).
        tol: KKT violation tolerance.
        max_iter: iteration cap; hitting it sets ``converged=False``.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(labels, dtype=float)
    n = y.size
    if K.shape != (n, n):
        raise PreconditionError(f"kernel shape {K.shape} does not match {n} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise PreconditionError("labels must be +1 / -1")
    if penalty <= 0:
        raise ParameterError("penalty must be > 0")
    C = float(penalty)
    Q = (y[:, None] * y[None, :]) * K
    diagK = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        v = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, v, -np.inf)))
        gmax = v[i]
        gmin = np.where(low, v, np.inf).min()
        if gmax - gmin < tol:
            converged = True
            break
        b = gmax - v
        cand = low & (b > 0)
        a = diagK[i] + diagK - 2.0 * K[i]
        a = np.where(a > 0, a, TAU)
        score = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(score))

        ai_old, aj_old = alpha[i], alpha[j]
        quad = diagK[i] + diagK[j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = TAU
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j], alpha[i] = 0.0, diff
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, C - diff
            elif alpha[j] > C:
                alpha[j], alpha[i] = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i], alpha[j] = C, total - C
            elif alpha[j] < 0:
                alpha[j], alpha[i] = 0.0, total
            if total > C:
                if alpha[j] > C:
                    alpha[j], alpha[i] = C, total - C
            elif alpha[i] < 0:
                alpha[i], alpha[j] = 0.0, total
        G += Q[:, i] * (alpha[i] - ai_old) + Q[:, j] * (alpha[j] - aj_old)
    if not converged:
        logger.debug("SMO hit max_iter=%d (C=%g)", max_iter, C)
    bias = _bias(alpha, y, G, C)
    sv = np.flatnonzero(alpha > 0)
    return SvmModel(alpha[sv] * y[sv], sv, bias, gamma, C, kernel_fingerprint(K), converged, it)


def svm_decision(model: SvmModel, K_test_rows: np.ndarray) -> np.ndarray:
    """Decision values; ``K_test_rows[t, i]`` is the kernel between test ``t`` and train ``i``."""
    K = np.atleast_2d(np.asarray(K_test_rows, dtype=float))
    return K[:, model.support_indices] @ model.dual_coefs + model.bias


def svm_predict(model: SvmModel, K_test_rows: np.ndarray) -> np.ndarray:
    return np.where(svm_decision(model, K_test_rows) >= 0, 1, -1)
