"""Transport plans with prescribed marginals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError

MARGINAL_TOL = 1e-8


@dataclass(eq=False)
class Coupling:
    plan: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray
    converged: bool = True

    @property
    def shape(self):
        return self.plan.shape

    def residual(self) -> float:
        """Largest absolute marginal violation."""
        return max(
            float(np.abs(self.plan.sum(axis=1) - self.row_marginal).max()),
            float(np.abs(self.plan.sum(axis=0) - self.col_marginal).max()),
        )

    def is_feasible(self, tol: float = MARGINAL_TOL) -> bool:
        return bool(np.all(self.plan >= 0)) and self.residual() <= tol

    def check(self, tol: float = MARGINAL_TOL) -> None:
        if self.plan.shape != (self.row_marginal.size, self.col_marginal.size):
            raise PreconditionError("coupling shape does not match its marginals")
        if not self.is_feasible(tol):
            raise PreconditionError(f"coupling violates its marginals by {self.residual():.3e}")


def product_coupling(p: np.ndarray, q: np.ndarray) -> Coupling:
    return Coupling(np.outer(p, q), np.asarray(p, float), np.asarray(q, float))


def round_to_marginals(P: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Project a nonnegative matrix onto the coupling set by scaling and a rank-one fix.

    Scales rows and columns down to fit under ``p`` and ``q``, then adds the
    outer product of the remaining deficits. The result is nonnegative and
    meets both marginals up to rounding.
    """
    X = np.array(P, dtype=float, copy=True)
    rs = X.sum(axis=1)
    X *= np.minimum(1.0, np.divide(p, rs, out=np.ones_like(rs), where=rs > 0))[:, None]
    cs = X.sum(axis=0)
    X *= np.minimum(1.0, np.divide(q, cs, out=np.ones_like(cs), where=cs > 0))[None, :]
    er = p - X.sum(axis=1)
    ec = q - X.sum(axis=0)
    s = er.sum()
    if s > 0:
        X += np.outer(np.maximum(er, 0), np.maximum(ec, 0)) / s
    return X
