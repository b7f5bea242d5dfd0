"""Server side: aggregation and distance computation on released embeddings only.

This module deliberately imports nothing that can read a graph or an
unencoded embedding; the architecture test checks its import list.
"""

from __future__ import annotations

from typing import Optional, Sequence

from ..gnn import ModelParams
from ..ldp import EncodedEmbedding
from ..ot.cost import cost_from_embedding
from ..ot.gromov import SolverConfig
from ..ot.pairwise import PairwiseResult, pairwise_gw_matrix
from .aggregate import fedavg


class Server:
    def __init__(self, initial: ModelParams, aggregation: str = "nodes"):
        self.global_params = initial.copy()
        self.aggregation = aggregation
        # latest release per (client, local graph position)
        self.releases: dict = {}

    def broadcast(self) -> ModelParams:
        return self.global_params.copy()

    def receive(self, messages: Sequence) -> ModelParams:
        """Aggregate one round of client messages in client-id order."""
        msgs = sorted(messages, key=lambda m: m.client_id)
        weights = [m.node_count if self.aggregation == "nodes" else 1.0 for m in msgs]
        self.global_params = fedavg([m.params for m in msgs], weights)
        for m in msgs:
            if m.embeddings is not None:
                for k, emb in enumerate(m.embeddings):
                    if not isinstance(emb, EncodedEmbedding):
                        raise TypeError("server accepts encoded embeddings only")
                    self.releases[(m.client_id, k)] = emb
        return self.global_params

    def distances(self, order: Sequence, cfg: Optional[SolverConfig] = None, metric: str = "euclidean",
                  workers: int = 1) -> PairwiseResult:
        """Pairwise GW over the latest releases listed by ``(client, position)`` keys."""
        spaces = [cost_from_embedding(self.releases[key], metric) for key in order]
        return pairwise_gw_matrix(spaces, cfg, workers=workers)
