import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fedgw.errors import ParameterError, PreconditionError, ShapeError
from fedgw.gnn import (
    GCN,
    GIN,
    ModelParams,
    TrainConfig,
    extract_embedding,
    forward,
    init_params,
    loss,
    loss_and_grad,
    normalized_adjacency,
    train_local,
)
from fedgw.graph import Graph

from conftest import cycle_graph, random_graph


def labelled_graph(n, d, rng, p=0.4):
    g = random_graph(n, p, rng, labels=rng.integers(0, d, size=n))
    return g.with_features(rng.normal(size=(n, 3)))


def fd_check(g, params, h=1e-5):
    """Largest relative error between backprop and central differences."""
    _, grads = loss_and_grad(g, params)
    worst = 0.0
    for k, W in enumerate(params.weights):
        num = np.zeros_like(W)
        for idx in np.ndindex(W.shape):
            plus, minus = params.copy(), params.copy()
            plus.weights[k][idx] += h
            minus.weights[k][idx] -= h
            num[idx] = (loss(g, plus) - loss(g, minus)) / (2 * h)
        scale = max(np.abs(num).max(), np.abs(grads[k]).max(), 1e-8)
        worst = max(worst, float(np.abs(num - grads[k]).max() / scale))
    return worst


def test_normalized_adjacency_examples():
    assert np.array_equal(normalized_adjacency(Graph(1, [])), [[1.0]])
    assert np.allclose(normalized_adjacency(Graph(2, [(0, 1)])), 0.5)
    assert np.allclose(normalized_adjacency(cycle_graph(3)), 1 / 3)


def test_zero_weights_give_uniform_probs():
    params = init_params(GCN, 1, 4, 3)
    params.weights = [np.zeros_like(w) for w in params.weights]
    _, probs = forward(Graph(1, [], features=[[1.0]]), params)
    assert np.allclose(probs, 1 / 3)


@pytest.mark.parametrize("arch", [GCN, GIN])
def test_probs_rows_are_distributions(arch):
    rng = np.random.default_rng(0)
    g = labelled_graph(8, 3, rng)
    params = init_params(arch, 3, 5, 3, seed=1)
    hidden, probs = forward(g, params)
    assert np.allclose(probs.sum(axis=1), 1, atol=1e-9)
    assert np.all((probs > 0) & (probs < 1))
    assert hidden[0].shape == (8, 5)


@pytest.mark.parametrize("arch", [GCN, GIN])
@pytest.mark.parametrize("seed", range(4))
def test_gradients_match_finite_differences(arch, seed):
    rng = np.random.default_rng(seed)
    g = labelled_graph(int(rng.integers(3, 7)), 3, rng)
    params = init_params(arch, 3, 4, 3, seed=seed, gin_self_weight=0.3 if arch == GIN else 0.0)
    # nonzero biases exercise every gradient path
    params.weights = [w + 0.1 * rng.normal(size=w.shape) for w in params.weights]
    assert fd_check(g, params) <= 1e-4


@pytest.mark.parametrize("arch", [GCN, GIN])
def test_permutation_equivariance(arch):
    rng = np.random.default_rng(5)
    g = labelled_graph(7, 3, rng)
    params = init_params(arch, 3, 6, 3, seed=2)
    perm = rng.permutation(7)
    _, p1 = forward(g, params)
    _, p2 = forward(g.permuted(perm), params)
    assert np.allclose(p2[perm], p1, atol=1e-12)


def test_training_reduces_loss_and_is_deterministic():
    rng = np.random.default_rng(1)
    g = labelled_graph(10, 3, rng)
    params = init_params(GCN, 3, 16, 3, seed=0)
    cfg = TrainConfig(epochs=5, learning_rate=0.01)
    a = train_local(g, params, cfg)
    b = train_local(g, params, cfg)
    assert loss(g, a) <= loss(g, params)
    assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))


def test_zero_learning_rate_leaves_params():
    rng = np.random.default_rng(2)
    g = labelled_graph(5, 2, rng)
    params = init_params(GIN, 3, 4, 2, seed=0)
    out = train_local(g, params, TrainConfig(epochs=1, learning_rate=0.0))
    assert all(np.array_equal(x, y) for x, y in zip(out.weights, params.weights))


def test_config_and_input_errors():
    with pytest.raises(ParameterError):
        TrainConfig(epochs=0)
    params = init_params(GCN, 3, 4, 2)
    with pytest.raises(PreconditionError):
        train_local(Graph(2, [(0, 1)], features=np.ones((2, 3))), params, TrainConfig())
    with pytest.raises(ShapeError):
        forward(Graph(2, [(0, 1)], features=np.ones((2, 5))), params)
    with pytest.raises(ShapeError):
        ModelParams(GCN, [np.zeros((3, 4)), np.zeros(4), np.zeros((5, 2)), np.zeros(2)], 4)


def test_featureless_graphs_use_labels_or_degree():
    g = Graph(3, [(0, 1), (1, 2)], node_labels=[0, 1, 0])
    params = init_params(GCN, 2, 4, 2)
    _, probs = forward(g, params)
    assert probs.shape == (3, 2)


def test_embedding_bounds():
    rng = np.random.default_rng(3)
    g = labelled_graph(6, 4, rng)
    H = extract_embedding(g, init_params(GCN, 3, 8, 4, seed=1))
    assert H.shape == (6, 4) and H.alpha == 0 and H.beta == 1
    assert np.allclose(H.values.sum(axis=1), 1, atol=1e-9)


@settings(max_examples=10, deadline=None)
@given(st.sampled_from([GCN, GIN]), st.integers(0, 1000))
def test_text_roundtrip_is_exact(arch, seed):
    params = init_params(arch, 3, 4, 2, seed=seed, gin_self_weight=0.25)
    params.weights = [w + np.random.default_rng(seed).normal(size=w.shape) for w in params.weights]
    back = ModelParams.from_text(params.to_text())
    assert back.architecture == arch and back.gin_self_weight == 0.25
    assert all(np.array_equal(x, y) for x, y in zip(back.weights, params.weights))
