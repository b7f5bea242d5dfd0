"""Client side: private graphs, local training, LDP release."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..gnn import ModelParams, TrainConfig, extract_embedding, input_features, loss, train_local
from ..ldp import derive_seed, multibit_encode, optimal_m
from .config import EpsilonPolicy


@dataclass
class ClientMessage:
    """Everything a client sends upstream in one round."""

    client_id: int
    params: ModelParams
    node_count: int
    losses: list
    embeddings: Optional[list] = None
    epsilons: list = field(default_factory=list)


def client_update(graphs, global_params: ModelParams, cfg: TrainConfig, retrieve: bool,
                  policy: EpsilonPolicy = EpsilonPolicy(), seed: int = 0, m: Optional[int] = None,
                  num_node_classes: Optional[int] = None):
    """Train from the broadcast model over ``graphs`` in order, then optionally release.

    Returns ``(params, encoded)`` where ``encoded`` is ``None`` unless
    ``retrieve`` is set. Raw embeddings are created and consumed here only.
    Graph ``k`` is encoded with seed ``derive_seed(seed, k)``.
    """
    params, encoded, _, _ = _update(graphs, global_params, cfg, retrieve, policy, seed, m, num_node_classes)
    return params, encoded


def _update(graphs, global_params, cfg, retrieve, policy, seed, m, num_node_classes):
    if not graphs:
        raise ValueError("a client must hold at least one graph")
    params = global_params.copy()
    d = num_node_classes if num_node_classes is not None else global_params.num_classes
    feats = [input_features(g, d) for g in graphs]
    for g, X in zip(graphs, feats):
        params = train_local(g, params, cfg, X)
    losses = [loss(g, params, X) for g, X in zip(graphs, feats)]
    if not retrieve:
        return params, None, losses, []
    encoded, eps = [], []
    for k, (g, X) in enumerate(zip(graphs, feats)):
        H = extract_embedding(g, params, X)
        e = policy.epsilon_for(g.node_count)
        mk = m if m is not None else optimal_m(e, H.shape[1])
        encoded.append(multibit_encode(H, e, mk, derive_seed(seed, k)))
        eps.append(e)
    return params, encoded, losses, eps


class Client:
    """Holds a list of graphs that never leave this object."""

    def __init__(self, client_id: int, graphs, num_node_classes: int, policy: EpsilonPolicy,
                 m: Optional[int] = None):
        self.client_id = client_id
        self._graphs = list(graphs)
        self._num_node_classes = num_node_classes
        self._policy = policy
        self._m = m

    @property
    def node_count(self) -> int:
        return sum(g.node_count for g in self._graphs)

    def run_round(self, global_params: ModelParams, cfg: TrainConfig, retrieve: bool,
                  seed: int) -> ClientMessage:
        params, encoded, losses, eps = _update(self._graphs, global_params, cfg, retrieve, self._policy,
                                               seed, self._m, self._num_node_classes)
        return ClientMessage(self.client_id, params, self.node_count, losses, encoded, eps)
