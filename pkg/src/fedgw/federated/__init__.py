"""Simulated federation: partitioning, clients, server and FedAvg."""

from .aggregate import fedavg
from .client import Client, ClientMessage, client_update
from .config import FIXED, PER_GRAPH, EpsilonPolicy, FedConfig
from .partition import Partition, dirichlet_partition
from .server import Server
from .simulation import FederationResult, initial_params, make_partition, run_federation

__all__ = [
    "Client", "ClientMessage", "EpsilonPolicy", "FIXED", "FedConfig", "FederationResult", "PER_GRAPH",
    "Partition", "Server", "client_update", "dirichlet_partition", "fedavg", "initial_params",
    "make_partition", "run_federation",
]
