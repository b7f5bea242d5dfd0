"""Federation settings."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import ParameterError

PER_GRAPH = "per_graph"
FIXED = "fixed"


@dataclass(frozen=True)
class EpsilonPolicy:
    """Budget per released embedding: ``1/|V|`` per graph, or one fixed value."""

    kind: str = PER_GRAPH
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (PER_GRAPH, FIXED):
            raise ParameterError(f"unknown epsilon policy {self.kind!r}")
        if self.kind == FIXED and (self.value is None or self.value <= 0):
            raise ParameterError("a fixed epsilon policy needs a value > 0")

    @classmethod
    def fixed(cls, value: float) -> "EpsilonPolicy":
        return cls(FIXED, float(value))

    def epsilon_for(self, node_count: int) -> float:
        return 1.0 / node_count if self.kind == PER_GRAPH else float(self.value)


@dataclass
class FedConfig:
    """Rounds, clients and the shared model shape.

    ``retrieval_period`` s > 0 releases embeddings on every round divisible by
    s (and always on the last round); 0 releases only after the final round.
    ``m`` fixes the encoder's released columns per row; ``None`` uses the
    budget rule ``optimal_m``. ``partition="one_per_graph"`` gives every graph
    its own client (the subgraph-clustering setup) and ignores ``num_clients``.
    """

    rounds: int = 1
    num_clients: int = 1
    local_epochs: int = 1
    retrieval_period: int = 0
    dirichlet_alpha: float = 1.0
    epsilon_policy: EpsilonPolicy = field(default_factory=EpsilonPolicy)
    seed: int = 0
    architecture: str = "gcn"
    hidden_dim: int = 16
    num_layers: int = 2
    gin_mlp_depth: int = 2
    aggregation: str = "nodes"
    m: Optional[int] = None
    embedding_metric: str = "euclidean"
    partition: str = "dirichlet"

    def __post_init__(self):
        if self.rounds < 1 or self.num_clients < 1 or self.local_epochs < 1:
            raise ParameterError("rounds, num_clients and local_epochs must be >= 1")
        if self.retrieval_period < 0:
            raise ParameterError("retrieval_period must be >= 0")
        if self.dirichlet_alpha <= 0:
            raise ParameterError("dirichlet_alpha must be > 0")
        if self.aggregation not in ("nodes", "uniform"):
            raise ParameterError("aggregation must be 'nodes' or 'uniform'")
        if self.partition not in ("dirichlet", "one_per_graph"):
            raise ParameterError("partition must be 'dirichlet' or 'one_per_graph'")
        if isinstance(self.epsilon_policy, dict):
            self.epsilon_policy = EpsilonPolicy(**self.epsilon_policy)

    def retrieves_at(self, rnd: int) -> bool:
        """Whether round ``rnd`` (1-based) releases embeddings."""
        if rnd == self.rounds:
            return True
        return self.retrieval_period > 0 and rnd % self.retrieval_period == 0
