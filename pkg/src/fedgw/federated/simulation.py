"""Synchronous federation driver: broadcast, local training, FedAvg, release, GW."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Optional

from ..gnn import ModelParams, TrainConfig, init_params, input_features
from ..ldp import derive_seed
from ..ot.gromov import SolverConfig
from ..ot.pairwise import PairwiseResult
from .client import Client
from .config import FedConfig
from .partition import Partition, dirichlet_partition
from .server import Server

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class FederationResult:
    global_params: ModelParams
    embeddings: list
    distances: Optional[PairwiseResult]
    partition: Partition
    manifest: dict


def make_partition(bundle, fed_cfg: FedConfig) -> Partition:
    if fed_cfg.partition == "one_per_graph":
        assignment = {k: [k] for k in range(len(bundle))}
        return Partition(assignment, {k: ([k], [], []) for k in assignment})
    return dirichlet_partition(bundle, fed_cfg.num_clients, fed_cfg.dirichlet_alpha, fed_cfg.seed)


def initial_params(bundle, fed_cfg: FedConfig) -> ModelParams:
    in_dim = input_features(bundle.graphs[0], bundle.num_node_classes).shape[1]
    return init_params(fed_cfg.architecture, in_dim, fed_cfg.hidden_dim, bundle.num_node_classes,
                       seed=fed_cfg.seed, num_layers=fed_cfg.num_layers, gin_mlp_depth=fed_cfg.gin_mlp_depth)


def run_federation(bundle, fed_cfg: FedConfig, train_cfg: TrainConfig,
                   solver_cfg: Optional[SolverConfig] = None, compute_distances: bool = True,
                   workers: int = 1, initial: Optional[ModelParams] = None) -> FederationResult:
    """Simulate ``fed_cfg.rounds`` rounds over all clients and return the released state.

    ``train_cfg.epochs`` is overridden by ``fed_cfg.local_epochs``. The
    returned embeddings follow the bundle's graph order; the distance matrix
    is computed on the server from those encoded embeddings.
    """
    part = make_partition(bundle, fed_cfg)
    local_cfg = TrainConfig(fed_cfg.local_epochs, train_cfg.learning_rate, train_cfg.seed)
    clients = [Client(c, [bundle.graphs[i] for i in idx], bundle.num_node_classes,
                      fed_cfg.epsilon_policy, fed_cfg.m) for c, idx in part.assignment.items()]
    server = Server(initial if initial is not None else initial_params(bundle, fed_cfg), fed_cfg.aggregation)
    manifest = {
        "fed_config": asdict(fed_cfg),
        "train_config": asdict(local_cfg),
        "solver_config": asdict(solver_cfg or SolverConfig()),
        "partition": {str(c): idx for c, idx in part.assignment.items()},
        "rounds": [],
        "releases": [],
    }
    cumulative: dict = {}
    for rnd in range(1, fed_cfg.rounds + 1):
        retrieve = fed_cfg.retrieves_at(rnd)
        broadcast = server.broadcast()
        msgs = [cl.run_round(broadcast, local_cfg, retrieve, derive_seed(fed_cfg.seed, cl.client_id, rnd))
                for cl in clients]
        server.receive(msgs)
        manifest["rounds"].append({"round": rnd, "losses": {str(m.client_id): m.losses for m in msgs}})
        if retrieve:
            for m in msgs:
                for k, e in enumerate(m.epsilons):
                    key = (m.client_id, k)
                    cumulative[key] = cumulative.get(key, 0.0) + e
                    manifest["releases"].append({
                        "round": rnd, "client": m.client_id, "graph": part.assignment[m.client_id][k],
                        "epsilon": e, "cumulative_epsilon": cumulative[key]})
        logger.info("round %d/%d done%s", rnd, fed_cfg.rounds, " (released)" if retrieve else "")

    order = [None] * len(bundle)
    for c, idx in part.assignment.items():
        for k, gi in enumerate(idx):
            order[gi] = (c, k)
    embeddings = [server.releases[key] for key in order]
    distances = None
    if compute_distances:
        distances = server.distances(order, solver_cfg, fed_cfg.embedding_metric, workers)
    return FederationResult(server.global_params, embeddings, distances, part, manifest)
