"""Multi-bit local-DP encoder for node-embedding matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.special import expit

from .errors import DomainError, FormatError, ParameterError

# divisor in the budget-to-bits rule max(1, min(d, floor(eps / 2.18)))
M_STAR_DIVISOR = 2.18


@dataclass(eq=False)
class EmbeddingMatrix:
    """Node embedding with every entry in ``[alpha, beta]``."""

    values: np.ndarray
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DomainError("embedding must be a 2-D matrix")
        if not self.alpha < self.beta:
            raise DomainError(f"need alpha < beta, got [{self.alpha}, {self.beta}]")
        if self.values.size and (self.values.min() < self.alpha or self.values.max() > self.beta):
            raise DomainError(f"embedding entries leave [{self.alpha}, {self.beta}]")

    @property
    def shape(self):
        return self.values.shape


@dataclass(eq=False)
class EncodedEmbedding:
    """Encoder output over ``{-1, 0, +1}`` with exactly ``m`` nonzeros per row."""

    values: np.ndarray
    epsilon: float
    m: int
    seed: Optional[int] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.int8)
        if not np.isin(self.values, (-1, 0, 1)).all():
            raise DomainError("encoded entries must be -1, 0 or +1")
        if self.values.size and not np.all(np.count_nonzero(self.values, axis=1) == self.m):
            raise DomainError(f"every row must have exactly m={self.m} nonzeros")

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self, path) -> None:
        n, h = self.values.shape
        header = f"# n={n} h={h} epsilon={self.epsilon!r} m={self.m} seed={self.seed}"
        body = "\n".join(",".join(str(int(x)) for x in row) for row in self.values)
        Path(path).write_text(header + "\n" + body + "\n")

    @classmethod
    def from_csv(cls, path) -> "EncodedEmbedding":
        lines = Path(path).read_text().strip("\n").split("\n")
        if not lines[0].startswith("#"):
            raise FormatError(f"{path}: missing header line")
        meta = dict(kv.split("=", 1) for kv in lines[0][1:].split())
        rows = [[int(x) for x in ln.split(",")] for ln in lines[1:]]
        values = np.array(rows, dtype=np.int8).reshape(int(meta["n"]), int(meta["h"]))
        seed = None if meta["seed"] == "None" else int(meta["seed"])
        return cls(values, float(meta["epsilon"]), int(meta["m"]), seed)


def optimal_m(epsilon: float, d: int) -> int:
    """Number of released columns per row for a given budget and dimension."""
    return max(1, min(int(d), math.floor(epsilon / M_STAR_DIVISOR)))


def default_epsilon(g) -> float:
    """Per-graph default budget ``1 / |V|``."""
    return 1.0 / g.node_count


def cell_exponent(epsilon: float, m: int, n: int) -> float:
    """Per-cell privacy exponent; ``m * n`` cells share the budget."""
    return epsilon / (m * n)


def plus_probability(values: np.ndarray, alpha: float, beta: float, exponent: float) -> np.ndarray:
    """Probability of releasing +1 for a selected cell.

    ``1/(e^x + 1) + (v - alpha)/(beta - alpha) * (e^x - 1)/(e^x + 1)`` with
    ``x = exponent``, evaluated without overflow for large ``x``.
    """
    scaled = (np.asarray(values, dtype=float) - alpha) / (beta - alpha)
    return expit(-exponent) + scaled * np.tanh(exponent / 2.0)


def encode_cells(values: np.ndarray, alpha: float, beta: float, exponent: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Draw +-1 bits for already selected cells."""
    p = plus_probability(values, alpha, beta, exponent)
    return np.where(rng.random(p.shape) < p, 1, -1).astype(np.int8)


def derive_seed(*keys: int) -> int:
    """Independent 63-bit seed derived from a tuple of integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0] >> 1)


def multibit_encode(H: EmbeddingMatrix, epsilon: float, m: int, seed: int) -> EncodedEmbedding:
    """Release ``m`` randomized +-1 bits per row and zeros elsewhere.

    For every row a uniformly random ``m``-subset of the ``h`` columns is drawn
    without replacement; each selected cell becomes +1 with
    :func:`plus_probability` at exponent ``epsilon / (m n)`` and -1 otherwise.
    """
    if epsilon <= 0:
        raise ParameterError("epsilon must be > 0")
    n, h = H.shape
    if not 1 <= m <= h:
        raise ParameterError(f"m must lie in [1, {h}], got {m}")
    rng = np.random.default_rng(seed)
    cols = np.argsort(rng.random((n, h)), axis=1)[:, :m]
    rows = np.repeat(np.arange(n), m)
    cols = cols.ravel()
    out = np.zeros((n, h), dtype=np.int8)
    out[rows, cols] = encode_cells(H.values[rows, cols], H.alpha, H.beta,
                                   cell_exponent(epsilon, m, n), rng)
    return EncodedEmbedding(out, float(epsilon), int(m), int(seed))


@dataclass
class RatioProbe:
    ratio_plus: float
    ratio_minus: float
    se_plus: float
    se_minus: float
    unbounded_plus: bool = False
    unbounded_minus: bool = False
    bound: float = float("nan")


def _ratio(k1: int, k2: int, trials: int):
    if k2 == 0:
        return float("inf"), float("inf"), True
    p1, p2 = k1 / trials, k2 / trials
    r = p1 / p2
    if k1 == 0:
        return 0.0, 0.0, False
    se = r * math.sqrt((1 - p1) / (p1 * trials) + (1 - p2) / (p2 * trials))
    return r, se, False


def ldp_ratio_probe(v1: float, v2: float, alpha: float, beta: float, epsilon: float, m: int, n: int,
                    trials: int = 100_000, seed: int = 0) -> RatioProbe:
    """Monte-Carlo estimate of single-cell output probability ratios.

    Encodes ``v1`` and ``v2`` ``trials`` times each through the encoder's cell
    sampler and returns ``P[+1|v1]/P[+1|v2]`` and ``P[-1|v1]/P[-1|v2]`` with
    delta-method standard errors. A zero denominator count is flagged as
    unbounded.
    """
    for v in (v1, v2):
        if not alpha <= v <= beta:
            raise DomainError(f"{v} outside [{alpha}, {beta}]")
    if trials < 10_000:
        raise ParameterError("trials must be >= 10^4")
    x = cell_exponent(epsilon, m, n)
    rng = np.random.default_rng(seed)
    b1 = encode_cells(np.full(trials, v1), alpha, beta, x, rng)
    b2 = encode_cells(np.full(trials, v2), alpha, beta, x, rng)
    k1p, k2p = int((b1 == 1).sum()), int((b2 == 1).sum())
    rp, sp, up = _ratio(k1p, k2p, trials)
    rm, sm, um = _ratio(trials - k1p, trials - k2p, trials)
    return RatioProbe(rp, rm, sp, sm, up, um, math.exp(x))
