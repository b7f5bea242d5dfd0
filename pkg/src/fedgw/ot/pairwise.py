"""All-pairs GW / FGW distance matrices and their on-disk format."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import PreconditionError
from .gromov import SolverConfig, feature_cost, fgw_solve, gw_solve

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class PairwiseResult:
    matrix: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())

    def off_diagonal(self) -> np.ndarray:
        """Upper-triangle values, one per unordered pair."""
        iu = np.triu_indices(self.matrix.shape[0], k=1)
        return self.matrix[iu]


def _pair(args):
    i, j, Ci, Cj, Fi, Fj, trade_off, cfg = args
    if Fi is None:
        res = gw_solve(Ci, Cj, cfg)
    else:
        res = fgw_solve(Ci, Cj, feature_cost(Fi, Fj), trade_off, cfg)
    return i, j, res.value, res.converged, res.iterations


def pairwise_gw_matrix(spaces: Sequence, cfg: Optional[SolverConfig] = None,
                       features: Optional[Sequence[np.ndarray]] = None, trade_off: float = 0.5,
                       workers: int = 1) -> PairwiseResult:
    """Symmetric matrix of GW (or FGW when ``features`` are given) discrepancies.

    Each unordered pair ``i < j`` is solved once and mirrored; the diagonal
    is zero. With ``workers > 1`` pairs are farmed out to a process pool; every
    pair writes its own cell so the result does not depend on completion
    order.
    """
    N = len(spaces)
    if N < 1:
        raise PreconditionError("need at least one space")
    if features is not None and len(features) != N:
        raise PreconditionError("features must have one matrix per space")
    cfg = cfg or SolverConfig()
    D = np.zeros((N, N))
    conv = np.ones((N, N), dtype=bool)
    iters = np.zeros((N, N), dtype=np.int64)
    jobs = [
        (i, j, spaces[i], spaces[j],
         None if features is None else features[i], None if features is None else features[j],
         trade_off, cfg)
        for i in range(N) for j in range(i + 1, N)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pair, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        results = map(_pair, jobs)
    for i, j, value, ok, it in results:
        D[i, j] = D[j, i] = value
        conv[i, j] = conv[j, i] = ok
        iters[i, j] = iters[j, i] = it
    if not conv.all():
        logger.warning("%d pairs did not converge", int((~conv).sum() // 2))
    return PairwiseResult(D, conv, iters)


def save_distance_matrix(path, result: PairwiseResult, cfg: Optional[SolverConfig] = None,
                         **meta) -> None:
    """Write ``path`` (CSV matrix) and ``path.json`` (solver config, flags, metadata)."""
    path = Path(path)
    np.savetxt(path, result.matrix, delimiter=",", fmt="%.17g")
    sidecar = {
        "solver": asdict(cfg) if cfg is not None else None,
        "converged": result.converged.astype(int).tolist(),
        "iterations": result.iterations.tolist(),
        **meta,
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, default=_jsonable))


def load_distance_matrix(path):
    path = Path(path)
    D = np.loadtxt(path, delimiter=",", ndmin=2)
    meta = json.loads(Path(str(path) + ".json").read_text())
    return D, meta


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")
