"""Optimal-transport solvers: Sinkhorn, GW, fused GW, barycenters."""

from .barycenter import gw_barycenter
from .cost import cost_from_embedding, pairwise_distances
from .coupling import Coupling, product_coupling, round_to_marginals
from .gromov import (
    GwResult,
    SolverConfig,
    feature_cost,
    fgw_solve,
    gw_objective,
    gw_solve,
    kb_value,
    profile_cost,
    tensor_gradient,
)
from .lp import exact_ot
from .pairwise import PairwiseResult, load_distance_matrix, pairwise_gw_matrix, save_distance_matrix
from .sinkhorn import sinkhorn

__all__ = [
    "Coupling", "GwResult", "PairwiseResult", "SolverConfig", "cost_from_embedding", "exact_ot",
    "feature_cost", "fgw_solve", "gw_barycenter", "gw_objective", "gw_solve", "kb_value",
    "load_distance_matrix", "pairwise_distances", "pairwise_gw_matrix", "product_coupling",
    "profile_cost", "round_to_marginals", "save_distance_matrix", "sinkhorn", "tensor_gradient",
]
