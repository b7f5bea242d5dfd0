"""Weighted parameter averaging."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..errors import AggregationError
from ..gnn import ModelParams


def fedavg(params_list: Sequence[ModelParams], weights: Optional[Sequence[float]] = None) -> ModelParams:
    """Coordinate-wise weighted mean; weights are normalized to sum to one."""
    if not params_list:
        raise AggregationError("nothing to aggregate")
    w = np.ones(len(params_list)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(params_list),) or np.any(w < 0) or w.sum() <= 0:
        raise AggregationError("weights must be nonnegative, not all zero, one per model")
    w = w / w.sum()
    ref = params_list[0]
    for p in params_list[1:]:
        if p.architecture != ref.architecture or len(p.weights) != len(ref.weights) or any(
                a.shape != b.shape for a, b in zip(p.weights, ref.weights)):
            raise AggregationError("models differ in architecture or shape")
    out = ref.copy()
    for k in range(len(ref.weights)):
        acc = w[0] * params_list[0].weights[k]
        for wi, p in zip(w[1:], params_list[1:]):
            acc = acc + wi * p.weights[k]
        out.weights[k] = acc
    return out
