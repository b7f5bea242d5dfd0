"""Dense GCN / GIN node classifiers with hand-written backpropagation."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import FormatError, ParameterError, PreconditionError, ShapeError
from .graph import Graph, degree_one_hot, one_hot
from .ldp import EmbeddingMatrix

GCN = "gcn"
GIN = "gin"


@dataclass(eq=False)
class ModelParams:
    """Weights of a node classifier.

    ``weights`` alternates ``W, b`` for every linear map in forward order.
    """

    architecture: str
    weights: list
    hidden_dim: int
    num_layers: int = 2
    gin_mlp_depth: int = 2
    gin_self_weight: float = 0.0

    def __post_init__(self):
        if self.architecture not in (GCN, GIN):
            raise ParameterError(f"unknown architecture {self.architecture!r}")
        if len(self.weights) != 2 * len(self.layout()):
            raise ShapeError(f"expected {2 * len(self.layout())} arrays, got {len(self.weights)}")
        for k in range(0, len(self.weights) - 2, 2):
            if self.weights[k].shape[1] != self.weights[k + 2].shape[0]:
                raise ShapeError(f"layer {k // 2} out-dim does not match layer {k // 2 + 1} in-dim")
        for k in range(0, len(self.weights), 2):
            if self.weights[k + 1].shape != (self.weights[k].shape[1],):
                raise ShapeError(f"bias {k // 2} has shape {self.weights[k + 1].shape}")

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def num_classes(self) -> int:
        return self.weights[-1].shape[0]

    def layout(self) -> list[tuple[bool, bool]]:
        """``(propagate, relu)`` flags for every linear map."""
        if self.architecture == GCN:
            return [(True, True)] * (self.num_layers - 1) + [(True, False)]
        per_layer = [(True, True)] + [(False, True)] * (self.gin_mlp_depth - 1)
        return per_layer * self.num_layers + [(False, False)]

    def copy(self) -> "ModelParams":
        return replace(self, weights=[w.copy() for w in self.weights])

    def flat(self) -> np.ndarray:
        return np.concatenate([w.ravel() for w in self.weights])

    def to_text(self) -> str:
        """Shape-tagged text record; floats are written with ``repr`` so reading back is exact."""
        lines = [
            f"architecture {self.architecture}",
            f"hidden_dim {self.hidden_dim}",
            f"num_layers {self.num_layers}",
            f"gin_mlp_depth {self.gin_mlp_depth}",
            f"gin_self_weight {self.gin_self_weight!r}",
            f"arrays {len(self.weights)}",
        ]
        for w in self.weights:
            lines.append("shape " + " ".join(str(s) for s in w.shape))
            lines.append(" ".join(repr(float(x)) for x in w.ravel()))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ModelParams":
        lines = text.strip("\n").split("\n")
        head = dict(ln.split(" ", 1) for ln in lines[:6])
        weights = []
        body = lines[6:]
        for k in range(int(head["arrays"])):
            tag, values = body[2 * k], body[2 * k + 1]
            if not tag.startswith("shape"):
                raise FormatError(f"expected shape tag, got {tag!r}")
            shape = tuple(int(s) for s in tag.split()[1:])
            data = np.array([float(x) for x in values.split()]) if values.strip() else np.zeros(0)
            weights.append(data.reshape(shape))
        return cls(head["architecture"], weights, int(head["hidden_dim"]), int(head["num_layers"]),
                   int(head["gin_mlp_depth"]), float(head["gin_self_weight"]))


@dataclass
class TrainConfig:
    epochs: int = 1
    learning_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ParameterError("learning_rate must be >= 0")


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    s = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-s, s, size=(fan_in, fan_out))


def init_params(architecture: str, in_dim: int, hidden_dim: int, num_classes: int, seed: int = 0,
                num_layers: int = 2, gin_mlp_depth: int = 2, gin_self_weight: float = 0.0) -> ModelParams:
    """Glorot-uniform weights and zero biases."""
    rng = np.random.default_rng(seed)
    if architecture == GCN:
        dims = [in_dim] + [hidden_dim] * (num_layers - 1) + [num_classes]
    elif architecture == GIN:
        dims = [in_dim] + [hidden_dim] * (num_layers * gin_mlp_depth) + [num_classes]
    else:
        raise ParameterError(f"unknown architecture {architecture!r}")
    weights = []
    for a, b in zip(dims[:-1], dims[1:]):
        weights += [glorot(rng, a, b), np.zeros(b)]
    return ModelParams(architecture, weights, hidden_dim, num_layers, gin_mlp_depth, gin_self_weight)


def normalized_adjacency(g: Graph) -> np.ndarray:
    """Symmetrically normalized adjacency with self-loops, ``D^-1/2 (A+I) D^-1/2``."""
    A = g.adjacency() + np.eye(g.node_count)
    d = 1.0 / np.sqrt(A.sum(axis=1))
    return A * d[:, None] * d[None, :]


def propagation_operator(g: Graph, params: ModelParams) -> np.ndarray:
    if params.architecture == GCN:
        return normalized_adjacency(g)
    return g.adjacency() + (1.0 + params.gin_self_weight) * np.eye(g.node_count)


def input_features(g: Graph, num_node_classes: Optional[int] = None, max_degree: int = 10) -> np.ndarray:
    """Node inputs: stored features, else one-hot node labels, else one-hot capped degree."""
    if g.features.shape[1]:
        return np.asarray(g.features)
    if g.node_labels is not None:
        d = num_node_classes if num_node_classes is not None else int(g.node_labels.max()) + 1
        return one_hot(g.node_labels, d)
    return degree_one_hot(g, max_degree)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward(P: np.ndarray, X: np.ndarray, params: ModelParams):
    if X.shape[1] != params.in_dim:
        raise ShapeError(f"input has {X.shape[1]} columns, model expects {params.in_dim}")
    h = X
    cache = []
    for k, (prop, relu) in enumerate(params.layout()):
        W, b = params.weights[2 * k], params.weights[2 * k + 1]
        a = P @ h if prop else h
        z = a @ W + b
        cache.append((a, z))
        h = np.maximum(z, 0.0) if relu else z
    return h, cache


def forward(g: Graph, params: ModelParams, features: Optional[np.ndarray] = None):
    """Run the model on one graph.

    Returns:
        (hidden, probs): post-activation hidden matrices of every non-final
        linear map, and the row-softmax class probabilities.
    """
    X = input_features(g, params.num_classes) if features is None else features
    logits, cache = _forward(propagation_operator(g, params), X, params)
    hidden = [np.maximum(z, 0.0) for _, z in cache[:-1]]
    return hidden, softmax(logits)


def _check_labels(g: Graph, params: ModelParams) -> np.ndarray:
    if g.node_labels is None:
        raise PreconditionError("training needs node labels")
    if g.node_labels.max() >= params.num_classes:
        raise PreconditionError(f"node label {g.node_labels.max()} >= num_classes {params.num_classes}")
    return np.asarray(g.node_labels)


def loss(g: Graph, params: ModelParams, features: Optional[np.ndarray] = None) -> float:
    """Mean cross-entropy of the predicted class probabilities."""
    y = _check_labels(g, params)
    _, probs = forward(g, params, features)
    return float(-np.mean(np.log(probs[np.arange(y.size), y])))


def loss_and_grad(g: Graph, params: ModelParams, features: Optional[np.ndarray] = None):
    """Mean cross-entropy and its gradient w.r.t. every array in ``params.weights``."""
    y = _check_labels(g, params)
    P = propagation_operator(g, params)
    X = input_features(g, params.num_classes) if features is None else features
    logits, cache = _forward(P, X, params)
    probs = softmax(logits)
    n = y.size
    value = float(-np.mean(np.log(probs[np.arange(n), y])))

    layout = params.layout()
    grads = [None] * len(params.weights)
    dz = probs.copy()
    dz[np.arange(n), y] -= 1.0
    dz /= n
    for k in range(len(layout) - 1, -1, -1):
        a, _ = cache[k]
        W = params.weights[2 * k]
        grads[2 * k] = a.T @ dz
        grads[2 * k + 1] = dz.sum(axis=0)
        if k == 0:
            break
        da = dz @ W.T
        dh = P.T @ da if layout[k][0] else da
        dz = dh * (cache[k - 1][1] > 0)
    return value, grads


def train_local(g: Graph, params: ModelParams, cfg: TrainConfig,
                features: Optional[np.ndarray] = None) -> ModelParams:
    """``cfg.epochs`` full-batch gradient-descent steps on one graph."""
    _check_labels(g, params)
    X = input_features(g, params.num_classes) if features is None else features
    out = params.copy()
    for _ in range(cfg.epochs):
        _, grads = loss_and_grad(g, out, X)
        out.weights = [w - cfg.learning_rate * dw for w, dw in zip(out.weights, grads)]
    return out


def extract_embedding(g: Graph, params: ModelParams, features: Optional[np.ndarray] = None) -> EmbeddingMatrix:
    """Post-softmax node embedding with bounds ``[0, 1]``."""
    _, probs = forward(g, params, features)
    return EmbeddingMatrix(np.clip(probs, 0.0, 1.0), 0.0, 1.0)
