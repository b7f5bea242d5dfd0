"""Gromov-Wasserstein and fused GW discrepancies.

The squared-loss objective

    sum_{i,j,k,l} (C[i,k] - D[j,l])^2 T[i,j] T[k,l]

is evaluated through its factorization
``r' C^2 r + c' D^2 c - 2 <C, T D T'>`` with ``r = T 1`` and ``c = T' 1``,
and minimized over couplings by conditional gradient (exact line search) or
by a KL proximal point scheme.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..errors import ParameterError, PreconditionError
from ..graph import MetricMeasureSpace
from .coupling import MARGINAL_TOL, Coupling, round_to_marginals
from .lp import exact_ot
from .sinkhorn import sinkhorn_log

logger = logging.getLogger(__name__)

CG = "cg"
PPA = "ppa"
SQUARE = "square"
KL = "kl"


@dataclass
class SolverConfig:
    """Outer/inner loop settings shared by GW, FGW and barycenter solvers.

    ``inner_reg`` is relative to the mean absolute gradient entry, so the same
    value works for hop-count and unit-scale costs. ``inner_solver`` picks the
    conditional-gradient direction finder: ``"exact"`` (network simplex) or
    ``"sinkhorn"``.

    Besides the main start (product coupling or a provided plan), the solver
    also descends from every entry of ``extra_starts`` and keeps the lowest
    objective: ``"profile"`` is the exact OT plan between the nodes' distance
    profiles, ``"aligned"`` is the index-aligned plan ``diag(p)`` (used only
    when both spaces carry the same measure). With ``both_orders`` the
    swapped problem ``(D, C)`` is solved as well and the better plan kept,
    which makes the discrepancy exactly symmetric in its arguments.
    """

    method: str = CG
    max_outer_iters: int = 500
    outer_tol: float = 1e-9
    inner_reg: float = 1e-2
    inner_iters: int = 2000
    inner_tol: float = 1e-9
    init: str = "product"
    seed: int = 0
    inner_solver: str = "exact"
    extra_starts: tuple = ("profile", "aligned")
    both_orders: bool = True

    def __post_init__(self):
        if self.method not in (CG, PPA):
            raise ParameterError(f"method must be {CG!r} or {PPA!r}")
        if self.init not in ("product", "provided"):
            raise ParameterError("init must be 'product' or 'provided'")
        if self.inner_solver not in ("exact", "sinkhorn"):
            raise ParameterError("inner_solver must be 'exact' or 'sinkhorn'")
        if min(self.outer_tol, self.inner_tol, self.inner_reg) <= 0:
            raise ParameterError("tolerances and inner_reg must be > 0")
        if self.max_outer_iters < 1 or self.inner_iters < 1:
            raise ParameterError("iteration budgets must be >= 1")
        self.extra_starts = tuple(self.extra_starts)
        unknown = set(self.extra_starts) - {"profile", "aligned"}
        if unknown:
            raise ParameterError(f"unknown extra starts {sorted(unknown)}")


@dataclass(eq=False)
class GwResult:
    value: float
    coupling: Coupling
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


SpaceLike = Union[MetricMeasureSpace, np.ndarray]


def _unpack(space: SpaceLike):
    if isinstance(space, MetricMeasureSpace):
        return np.asarray(space.cost), np.asarray(space.measure)
    C = np.asarray(space, dtype=float)
    return C, np.full(C.shape[0], 1.0 / C.shape[0])


def _plan(T) -> np.ndarray:
    return np.asarray(T.plan if isinstance(T, Coupling) else T, dtype=float)


def _square_value(C, D, T) -> float:
    r, c = T.sum(axis=1), T.sum(axis=0)
    return float(r @ (C * C) @ r + c @ (D * D) @ c - 2.0 * np.sum(C * (T @ D @ T.T)))


def kl_loss(a, b):
    """Elementwise ``a log(a/b) - a + b`` with ``0 log 0 = 0``; ``a > 0 = b`` gives inf."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        alog = np.where(a > 0, a * np.log(np.where(a > 0, a, 1.0) / np.where(b > 0, b, 1.0)), 0.0)
        out = alog - a + b
    return np.where((a > 0) & (b <= 0), np.inf, out)


def _kl_value(C, D, T) -> float:
    L = kl_loss(C[:, None, :, None], D[None, :, None, :])
    W = T[:, :, None, None] * T[None, None, :, :]
    with np.errstate(invalid="ignore"):
        terms = np.where(W > 0, L * W, 0.0)
    return float(terms.sum())


def gw_objective(C: SpaceLike, D: SpaceLike, T, loss: str = SQUARE) -> float:
    """GW objective ``sum l(C[i,k], D[j,l]) T[i,j] T[k,l]`` at a given coupling.

    Raises:
        PreconditionError: if ``T`` does not carry the spaces' measures.
    """
    Cm, p = _unpack(C)
    Dm, q = _unpack(D)
    P = _plan(T)
    if P.shape != (p.size, q.size):
        raise PreconditionError(f"coupling shape {P.shape} does not match spaces {(p.size, q.size)}")
    if (np.abs(P.sum(axis=1) - p).max() > MARGINAL_TOL or np.abs(P.sum(axis=0) - q).max() > MARGINAL_TOL
            or np.any(P < 0)):
        raise PreconditionError("coupling marginals do not match the space measures")
    if loss == SQUARE:
        return _square_value(Cm, Dm, P)
    if loss == KL:
        return _kl_value(Cm, Dm, P)
    raise ParameterError(f"unknown loss {loss!r}")


def kb_value(C: MetricMeasureSpace, D: MetricMeasureSpace, T) -> float:
    """Koopmans-Beckmann form ``|C|^2/n^2 + |D|^2/m^2 - 2 tr(C T D T')``.

    Only defined for uniform measures.
    """
    Cm, p = _unpack(C)
    Dm, q = _unpack(D)
    n, m = p.size, q.size
    if not (np.allclose(p, 1.0 / n, rtol=0, atol=1e-15) and np.allclose(q, 1.0 / m, rtol=0, atol=1e-15)):
        raise PreconditionError("Koopmans-Beckmann form needs uniform measures")
    P = _plan(T)
    return float(np.sum(Cm * Cm) / n**2 + np.sum(Dm * Dm) / m**2 - 2.0 * np.trace(Cm @ P @ Dm @ P.T))


def tensor_gradient(C: SpaceLike, D: SpaceLike, T, loss: str = SQUARE) -> np.ndarray:
    """Gradient of the squared-loss GW objective with respect to the plan.

    Uses the plan's own marginals, so it is the exact gradient of the quadratic
    form everywhere; on the coupling set with symmetric costs it equals
    ``2 (C^2 p 1' + 1 q' D^2 - 2 C T D)``.
    """
    if loss != SQUARE:
        raise ParameterError("only the squared loss has an analytic gradient here")
    Cm, _ = _unpack(C)
    Dm, _ = _unpack(D)
    P = _plan(T)
    r, c = P.sum(axis=1), P.sum(axis=0)
    C2, D2 = Cm * Cm, Dm * Dm
    return (((C2 + C2.T) @ r)[:, None] + ((D2 + D2.T) @ c)[None, :]
            - 2.0 * (Cm @ P @ Dm.T + Cm.T @ P @ Dm))


def _line_search(a: float, b: float) -> float:
    """Minimizer of ``a t^2 + b t`` over ``t in [0, 1]``."""
    if a > 0:
        return float(min(1.0, max(0.0, -b / (2.0 * a))))
    return 1.0 if a + b < 0 else 0.0


class _Problem:
    """``(1 - alpha) <M, T> + alpha * GW(T)`` on the coupling set of ``(p, q)``."""

    def __init__(self, C, D, p, q, M, alpha):
        self.C, self.D, self.p, self.q = C, D, p, q
        self.M = M
        self.alpha = alpha
        # gradient constant on the coupling set (symmetric costs)
        self.const = 2.0 * (((C * C) @ p)[:, None] + ((D * D) @ q)[None, :])

    def value(self, T) -> float:
        v = self.alpha * _square_value(self.C, self.D, T) if self.alpha > 0 else 0.0
        if self.M is not None and self.alpha < 1:
            v += (1.0 - self.alpha) * float(np.sum(self.M * T))
        return v

    def grad(self, T) -> np.ndarray:
        G = self.alpha * (self.const - 4.0 * self.C @ T @ self.D) if self.alpha > 0 else 0.0
        if self.M is not None and self.alpha < 1:
            G = G + (1.0 - self.alpha) * self.M
        return np.broadcast_to(G, T.shape).astype(float)

    def curvature(self, delta) -> float:
        return -2.0 * self.alpha * float(np.sum(self.C * (delta @ self.D @ delta.T)))


def _direction(G, p, q, cfg: SolverConfig) -> np.ndarray:
    if cfg.inner_solver == "exact":
        return exact_ot(G, p, q)
    scale = max(float(np.abs(G).mean()), 1e-300)
    P, _, _ = sinkhorn_log(-(G - G.min()) / (cfg.inner_reg * scale), p, q, cfg.inner_iters, cfg.inner_tol)
    return round_to_marginals(P, p, q)


def _converged(f_old: float, f_new: float, tol: float) -> bool:
    return abs(f_old - f_new) <= tol * max(abs(f_new), 1e-12)


def _cg(prob: _Problem, T: np.ndarray, cfg: SolverConfig):
    f = prob.value(T)
    history = [f]
    for it in range(1, cfg.max_outer_iters + 1):
        G = prob.grad(T)
        delta = _direction(G, prob.p, prob.q, cfg) - T
        t = _line_search(prob.curvature(delta), float(np.sum(G * delta)))
        if t > 0:
            T = T + t * delta
        f_new = prob.value(T)
        history.append(f_new)
        done = t == 0 or _converged(f, f_new, cfg.outer_tol)
        f = f_new
        if done:
            return T, it, True, history
    return T, cfg.max_outer_iters, False, history


def _ppa(prob: _Problem, T: np.ndarray, cfg: SolverConfig):
    f = prob.value(T)
    best_T, best_f = T, f
    history = [f]
    for it in range(1, cfg.max_outer_iters + 1):
        G = prob.grad(T)
        scale = max(float(np.abs(G).mean()), 1e-300)
        with np.errstate(divide="ignore"):
            log_kernel = np.log(T) - (G - G.min()) / (cfg.inner_reg * scale)
        P, _, _ = sinkhorn_log(log_kernel, prob.p, prob.q, cfg.inner_iters, cfg.inner_tol)
        T = round_to_marginals(P, prob.p, prob.q)
        f_new = prob.value(T)
        history.append(f_new)
        if f_new < best_f:
            best_T, best_f = T, f_new
        if _converged(f, f_new, cfg.outer_tol):
            return best_T, it, True, history
        f = f_new
    return best_T, cfg.max_outer_iters, False, history


def _quantiles(rows: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """Quantile functions of uniformly weighted rows evaluated at ``levels``."""
    k = rows.shape[1]
    idx = np.minimum(np.floor(levels * k).astype(np.int64), k - 1)
    return np.sort(rows, axis=1)[:, idx]


def _w2_1d(a, wa, b, wb) -> float:
    ia, ib = np.argsort(a, kind="stable"), np.argsort(b, kind="stable")
    a, wa, b, wb = a[ia], wa[ia], b[ib], wb[ib]
    ca, cb = np.cumsum(wa), np.cumsum(wb)
    cuts = np.union1d(ca, cb)
    cuts = cuts[cuts < 1.0 - 1e-14]
    lo = np.concatenate([[0.0], cuts])
    hi = np.concatenate([cuts, [1.0]])
    mid = 0.5 * (lo + hi)
    qa = a[np.minimum(np.searchsorted(ca, mid), a.size - 1)]
    qb = b[np.minimum(np.searchsorted(cb, mid), b.size - 1)]
    return float(np.sum((hi - lo) * (qa - qb) ** 2))


def profile_cost(C, p, D, q) -> np.ndarray:
    """Squared 1-D Wasserstein distance between node distance profiles.

    Entry ``(i, j)`` compares the distribution of ``C[i, :]`` under ``p`` with
    that of ``D[j, :]`` under ``q``.
    """
    n, m = p.size, q.size
    if np.allclose(p, 1.0 / n, rtol=0, atol=1e-15) and np.allclose(q, 1.0 / m, rtol=0, atol=1e-15):
        cuts = np.union1d(np.arange(1, n) / n, np.arange(1, m) / m)
        lo = np.concatenate([[0.0], cuts])
        hi = np.concatenate([cuts, [1.0]])
        mid, w = 0.5 * (lo + hi), hi - lo
        QA, QB = _quantiles(C, mid), _quantiles(D, mid)
        M = ((QA * QA) @ w)[:, None] + ((QB * QB) @ w)[None, :] - 2.0 * (QA * w) @ QB.T
        return np.maximum(M, 0.0)
    return np.array([[_w2_1d(C[i], p, D[j], q) for j in range(m)] for i in range(n)])


def _starts(Cm, p, Dm, q, M, alpha, cfg: SolverConfig, init) -> list:
    if cfg.init == "provided" or init is not None:
        if init is None:
            raise PreconditionError("init='provided' needs an initial coupling")
        T0 = _plan(init).copy()
        Coupling(T0, p, q).check()
    else:
        T0 = np.outer(p, q)
    starts = [T0]
    if p.size == 1 or q.size == 1:
        return starts
    if "profile" in cfg.extra_starts:
        cost = alpha * profile_cost(Cm, p, Dm, q)
        if M is not None and alpha < 1:
            cost = cost + (1.0 - alpha) * M
        starts.append(exact_ot(cost, p, q))
    if "aligned" in cfg.extra_starts and p.size == q.size and np.array_equal(p, q):
        starts.append(np.diag(p))
    return starts


def _descend(Cm, p, Dm, q, M, alpha, cfg: SolverConfig, init):
    prob = _Problem(Cm, Dm, p, q, M, alpha)
    run = _cg if cfg.method == CG else _ppa
    best = None
    total = 0
    for T0 in _starts(Cm, p, Dm, q, M, alpha, cfg, init):
        out = run(prob, T0, cfg)
        total += out[1]
        if best is None or prob.value(out[0]) < prob.value(best[0]) - 1e-14:
            best = out
    T, _, converged, history = best
    return prob, T, total, converged, history


def _ranks(keys) -> np.ndarray:
    table = {k: r for r, k in enumerate(sorted(set(keys)))}
    return np.array([table[k] for k in keys], dtype=np.int64)


def canonical_order(C: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Node order that depends only on the space, not on how it is indexed.

    Colour refinement: start from (mass, sorted distance row) and repeatedly
    split colours by the multiset of (distance, neighbour colour) pairs.
    Nodes still tied afterwards keep their input order.
    """
    n = p.size
    colors = _ranks([(float(p[i]), tuple(np.sort(C[i]).tolist())) for i in range(n)])
    for _ in range(n):
        keys = [(int(colors[i]), tuple(sorted(zip(C[i].tolist(), colors.tolist())))) for i in range(n)]
        refined = _ranks(keys)
        if refined.max() == colors.max():
            break
        colors = refined
    return np.argsort(colors, kind="stable")


def _solve(C: SpaceLike, D: SpaceLike, M, alpha: float, cfg: SolverConfig, init) -> GwResult:
    Cm, p = _unpack(C)
    Dm, q = _unpack(D)
    # solve in canonical node order so relabelled inputs follow the same path
    oc, od = canonical_order(Cm, p), canonical_order(Dm, q)
    Cc, pc, Dc, qc = Cm[np.ix_(oc, oc)], p[oc], Dm[np.ix_(od, od)], q[od]
    Mc = None if M is None else M[np.ix_(oc, od)]
    init_c = None if init is None else _plan(init)[np.ix_(oc, od)]
    prob, T, iters, converged, history = _descend(Cc, pc, Dc, qc, Mc, alpha, cfg, init_c)
    if cfg.both_orders and (p.size > 1 and q.size > 1):
        Mt = None if Mc is None else Mc.T
        init_t = None if init_c is None else init_c.T
        prob_t, Tt, it_t, conv_t, hist_t = _descend(Dc, qc, Cc, pc, Mt, alpha, cfg, init_t)
        iters += it_t
        if prob_t.value(Tt) < prob.value(T) - 1e-14:
            T, converged, history = np.ascontiguousarray(Tt.T), conv_t, hist_t
    if not converged:
        logger.debug("GW solver stopped after %d iterations without converging", iters)
    plan = np.empty_like(T)
    plan[np.ix_(oc, od)] = T
    value = max(0.0, prob.value(T))
    return GwResult(value, Coupling(plan, p, q, converged), iters, converged, history)


def gw_solve(C: SpaceLike, D: SpaceLike, cfg: Optional[SolverConfig] = None, init=None) -> GwResult:
    """Squared-loss GW discrepancy between two metric-measure spaces.

    Args:
        C, D: spaces (bare arrays get uniform measures).
        cfg: solver settings; defaults to conditional gradient from the
            product coupling.
        init: optional starting coupling.

    Returns:
        GwResult whose ``value`` is the objective at the returned coupling.
    """
    return _solve(C, D, None, 1.0, cfg or SolverConfig(), init)


def fgw_solve(C: SpaceLike, D: SpaceLike, feature_cost: np.ndarray, trade_off: float,
              cfg: Optional[SolverConfig] = None, init=None) -> GwResult:
    """Fused GW: ``(1 - trade_off) <M, T> + trade_off * GW(T)``."""
    if not 0.0 <= trade_off <= 1.0:
        raise ParameterError(f"trade_off must be in [0, 1], got {trade_off}")
    M = np.asarray(feature_cost, dtype=float)
    if np.any(M < 0):
        raise PreconditionError("feature_cost must be nonnegative")
    Cm, _ = _unpack(C)
    Dm, _ = _unpack(D)
    if M.shape != (Cm.shape[0], Dm.shape[0]):
        raise PreconditionError(f"feature_cost has shape {M.shape}, expected {(Cm.shape[0], Dm.shape[0])}")
    return _solve(C, D, M, float(trade_off), cfg or SolverConfig(), init)


def feature_cost(F1: np.ndarray, F2: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between the rows of two feature matrices."""
    F1 = np.asarray(F1, dtype=float)
    F2 = np.asarray(F2, dtype=float)
    M = (F1 * F1).sum(1)[:, None] + (F2 * F2).sum(1)[None, :] - 2.0 * F1 @ F2.T
    return np.maximum(M, 0.0)
