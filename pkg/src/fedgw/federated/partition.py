"""Label-skewed client partitions drawn from a Dirichlet prior."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError, PartitionError, PreconditionError

logger = logging.getLogger(__name__)

VAL_FRACTION = 0.2
TEST_FRACTION = 0.1


@dataclass
class Partition:
    """``assignment[c]`` lists client ``c``'s graph indices; ``splits[c]`` is (train, val, test)."""

    assignment: dict
    splits: dict

    @property
    def num_clients(self) -> int:
        return len(self.assignment)

    def check(self, num_graphs: int) -> None:
        seen = sorted(i for idx in self.assignment.values() for i in idx)
        if seen != list(range(num_graphs)):
            raise PartitionError("assignment does not cover every graph exactly once")


def _holdout(indices, rng):
    idx = np.array(indices, dtype=int)
    rng.shuffle(idx)
    n_val = int(np.floor(VAL_FRACTION * idx.size + 0.5))
    n_test = int(np.floor(TEST_FRACTION * idx.size + 0.5))
    test, val, train = idx[:n_test], idx[n_test:n_test + n_val], idx[n_test + n_val:]
    return sorted(train.tolist()), sorted(val.tolist()), sorted(test.tolist())


def _deal(labels, n_clients, alpha, rng):
    buckets = [[] for _ in range(n_clients)]
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        rng.shuffle(idx)
        props = rng.dirichlet(np.full(n_clients, alpha))
        cuts = (np.cumsum(props)[:-1] * idx.size).astype(int)
        for k, part in enumerate(np.split(idx, cuts)):
            buckets[k].extend(part.tolist())
    return buckets


def dirichlet_partition(bundle, n_clients: int, alpha: float, seed: int = 0,
                        max_retries: int = 100) -> Partition:
    """Deal every label class over clients with Dirichlet(alpha) proportions.

    Draws are repeated up to ``max_retries`` times until no client is empty;
    after that, empty clients take one graph each from the currently largest
    clients.
    """
    labels = bundle.graph_labels
    n = labels.size
    if n_clients < 1 or alpha <= 0:
        raise ParameterError("need n_clients >= 1 and alpha > 0")
    if any(g.graph_label is None for g in bundle.graphs):
        raise PreconditionError("every graph needs a graph label")
    if n < n_clients:
        raise PartitionError(f"{n} graphs cannot fill {n_clients} clients")
    rng = np.random.default_rng(seed)
    for attempt in range(max_retries):
        buckets = _deal(labels, n_clients, alpha, rng)
        if all(buckets):
            break
    else:
        logger.info("dirichlet draw left empty clients after %d tries; patching", max_retries)
        for k in range(n_clients):
            if not buckets[k]:
                donor = max(range(n_clients), key=lambda j: (len(buckets[j]), -j))
                buckets[k].append(buckets[donor].pop())
    assignment = {k: sorted(b) for k, b in enumerate(buckets)}
    splits = {k: _holdout(b, rng) for k, b in assignment.items()}
    part = Partition(assignment, splits)
    part.check(n)
    return part
