import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import path_graph, planted_spaces, point_cloud_space, random_graph
from fedgw.downstream import (
    adjusted_rand_index,
    classical_mds,
    cross_validate,
    epsilon_sweep,
    ged_bruteforce,
    gw_kernel,
    gw_kmeans,
    knn_classify,
    neighbor_sensitivity,
    stratified_split,
    svm_decision,
    svm_predict,
    svm_train,
    write_sweep_csv,
)
from fedgw.downstream.kmeans import kmeanspp_seeds, round_half_up
from fedgw.errors import ParameterError, PreconditionError, SizeCapError, StratificationError
from fedgw.gnn import GCN, init_params
from fedgw.graph import Graph, MetricMeasureSpace, apsp


# ---------------------------------------------------------------- kernel and SVM

def test_gw_kernel_examples():
    D = np.array([[0.0, np.log(2)], [np.log(2), 0.0]])
    K = gw_kernel(D, 1.0)
    assert np.array_equal(np.diag(K), [1.0, 1.0])
    assert K[0, 1] == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        gw_kernel(D, 0.0)
    with pytest.raises(PreconditionError):
        gw_kernel(-D, 1.0)


def rbf_problem(n, seed):
    rng = np.random.default_rng(seed)
    X = np.concatenate([rng.normal(-1, 1, (n // 2, 2)), rng.normal(1, 1, (n - n // 2, 2))])
    y = np.array([-1] * (n // 2) + [1] * (n - n // 2))
    D = ((X[:, None] - X[None]) ** 2).sum(-1)
    return np.exp(-0.5 * D), y


@pytest.mark.parametrize("seed,C", [(0, 0.1), (1, 1.0), (2, 10.0)])
def test_svm_matches_reference_solver_on_psd_kernel(seed, C):
    from sklearn.svm import SVC

    K, y = rbf_problem(40, seed)
    ours = svm_train(K, y, C, tol=1e-8)
    ref = SVC(C=C, kernel="precomputed", tol=1e-8).fit(K, y)
    assert ours.converged
    assert np.allclose(svm_decision(ours, K), ref.decision_function(K), atol=1e-5)
    full = np.zeros(40)
    full[ours.support_indices] = ours.dual_coefs
    ref_full = np.zeros(40)
    ref_full[ref.support_] = ref.dual_coef_[0]
    assert np.allclose(full, ref_full, atol=1e-5)


def test_svm_block_kernel_is_perfect():
    y = np.array([1, 1, 1, 1, -1, -1, -1, -1])
    K = np.where(np.equal.outer(y, y), 1.0, 0.0)
    model = svm_train(K, y, 10.0)
    assert np.array_equal(svm_predict(model, K), y)


@pytest.mark.parametrize("seed", range(5))
def test_svm_dual_feasibility_invariants(seed):
    rng = np.random.default_rng(seed)
    D = rng.random((20, 20))
    D = D + D.T
    np.fill_diagonal(D, 0)
    K = gw_kernel(D, 2.0)  # generally indefinite
    y = np.where(rng.random(20) < 0.5, 1, -1)
    y[:2] = [1, -1]
    C = 3.0
    model = svm_train(K, y, C)
    coef = model.dual_coefs
    assert np.all(np.abs(coef) <= C + 1e-12)
    assert abs(coef.sum()) < 1e-9
    assert np.all(np.sign(coef) == y[model.support_indices])


def test_svm_tiny_penalty_and_duplicates():
    K, y = rbf_problem(10, 3)
    model = svm_train(K, y, 1e-7)
    assert np.all(np.abs(model.dual_coefs) <= 1e-7 + 1e-20)
    K2 = np.ones((4, 4))  # four identical points
    model = svm_train(K2, np.array([1, 1, -1, -1]), 1.0)
    assert model.converged and np.isfinite(model.bias)


def test_svm_rejects_bad_input():
    with pytest.raises(PreconditionError):
        svm_train(np.eye(3), [1, 0, -1], 1.0)
    with pytest.raises(ParameterError):
        svm_train(np.eye(2), [1, -1], 0.0)


# ---------------------------------------------------------------- splits and CV

def test_stratified_split_counts():
    labels = np.array([0] * 50 + [1] * 10)
    tr, va, te = stratified_split(labels, seed=0)
    assert sorted(np.concatenate([tr, va, te])) == list(range(60))
    assert (np.sum(labels[va] == 0), np.sum(labels[te] == 0)) == (10, 5)
    assert (np.sum(labels[va] == 1), np.sum(labels[te] == 1)) == (2, 1)
    with pytest.raises(StratificationError):
        stratified_split(np.array([0, 0, 0, 1, 1]), seed=0)


def separable_distances(n=40):
    y = np.array([0] * (n // 2) + [1] * (n // 2))
    return np.where(np.equal.outer(y, y), 0.1, 5.0) * (1 - np.eye(n)), y


def test_cross_validate_separable_and_single_grid_point():
    D, y = separable_distances()
    res = cross_validate(D, y, folds=3)
    assert res.mean_accuracy == 1.0 and res.std == 0.0
    c, g, acc, std = cross_validate(D, y, c_grid=(1.0,), gamma_grid=(1.0,), folds=2)
    assert (c, g, acc) == (1.0, 1.0, 1.0)


def test_cross_validate_shuffled_labels_near_chance():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 3))
    D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    y = rng.integers(0, 2, 200)
    res = cross_validate(D, y, c_grid=(1.0,), gamma_grid=(0.5,), folds=5)
    assert 0.3 <= res.mean_accuracy <= 0.7


def test_cross_validate_errors():
    D, y = separable_distances(10)
    with pytest.raises(ParameterError):
        cross_validate(D, y, folds=1)
    with pytest.raises(StratificationError):
        cross_validate(D[:5, :5], np.array([0, 0, 0, 1, 1]), folds=2)


# ---------------------------------------------------------------- kNN

def test_knn_examples():
    D = np.array([[0, 1, 2, 9], [1, 0, 1, 9], [2, 1, 0, 9], [9, 9, 9, 0]], dtype=float)
    pred = knn_classify(D, [0, 2, 3], np.array([0, 1, 1]), [1], k=1)
    assert pred.tolist() == [0]  # equal distances resolve by training order
    pred = knn_classify(D, [0, 2], np.array([0, 1]), [3], k=2)
    assert pred.tolist() == [0]  # vote tie, equal mean distance, smaller label
    with pytest.raises(ParameterError):
        knn_classify(D, [0], np.array([0]), [1], k=2)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_knn_invariant_to_monotone_rescaling(seed):
    rng = np.random.default_rng(seed)
    D = rng.random((12, 12))
    D = D + D.T
    train = np.arange(8)
    labels = rng.integers(0, 3, 8)
    a = knn_classify(D, train, labels, np.arange(8, 12), k=3)
    b = knn_classify(3.0 * D + 1.0, train, labels, np.arange(8, 12), k=3)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------- GED

def test_ged_examples():
    k3 = Graph(3, [(0, 1), (1, 2), (0, 2)])
    assert ged_bruteforce(k3, path_graph(3)) == 1
    assert ged_bruteforce(path_graph(3), Graph(4, [(0, 1), (1, 2)])) == 1
    assert ged_bruteforce(Graph(1, []), Graph(2, [(0, 1)])) == 2
    a = Graph(2, [(0, 1)], node_labels=[0, 1])
    b = Graph(2, [(0, 1)], node_labels=[0, 2])
    assert ged_bruteforce(a, b) == 1
    with pytest.raises(SizeCapError):
        ged_bruteforce(path_graph(9), path_graph(3))


def _to_nx(g):
    import networkx as nx

    h = nx.Graph()
    labels = g.node_labels if g.node_labels is not None else [0] * g.node_count
    h.add_nodes_from((i, {"l": int(labels[i])}) for i in range(g.node_count))
    h.add_edges_from(g.sorted_edges())
    return h


@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_ged_matches_independent_search_and_is_symmetric(n1, n2, seed):
    nx = pytest.importorskip("networkx")
    rng = np.random.default_rng(seed)
    g1 = random_graph(n1, 0.5, rng, labels=rng.integers(0, 2, n1))
    g2 = random_graph(n2, 0.5, rng, labels=rng.integers(0, 2, n2))
    ours = ged_bruteforce(g1, g2)
    ref = nx.graph_edit_distance(_to_nx(g1), _to_nx(g2), node_match=lambda a, b: a["l"] == b["l"])
    assert ours == ref
    assert ged_bruteforce(g2, g1) == ours
    assert ged_bruteforce(g1.permuted(rng.permutation(n1)), g2) == ours
    assert ged_bruteforce(g1, g1) == 0


# ---------------------------------------------------------------- k-means

def test_round_half_up_and_seeding():
    assert [round_half_up(x) for x in (2.5, 3.5, 2.49)] == [3, 4, 2]
    D = np.array([[0, 1, 5], [1, 0, 5], [5, 5, 0]], dtype=float)
    seeds = kmeanspp_seeds(D, 3, np.random.default_rng(0))
    assert sorted(seeds) == [0, 1, 2]


def two_groups(rng, n_each=4):
    small = [point_cloud_space(4, rng) for _ in range(n_each)]
    big = []
    for _ in range(n_each):
        sp = point_cloud_space(4, rng)
        big.append(MetricMeasureSpace.uniform(sp.cost * 10))
    return small + big, np.array([0] * n_each + [1] * n_each)


def test_kmeans_recovers_two_separated_groups():
    spaces, truth = two_groups(np.random.default_rng(0))
    res = gw_kmeans(spaces, 2, seed=1)
    assert adjusted_rand_index(truth, res.labels) == 1.0
    hist = res.inertia_history
    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))


def test_kmeans_identical_groups_path_versus_scaled_path():
    C = np.array(apsp(path_graph(4)).cost)
    spaces = [MetricMeasureSpace.uniform(C)] * 5 + [MetricMeasureSpace.uniform(3 * C)] * 5
    res = gw_kmeans(spaces, 2, seed=0)
    assert adjusted_rand_index([0] * 5 + [1] * 5, res.labels) == 1.0


def test_kmeans_edge_cases():
    rng = np.random.default_rng(3)
    spaces = [point_cloud_space(int(n), rng) for n in (3, 4, 4, 5)]
    res = gw_kmeans(spaces, 4, seed=0)
    assert sorted(res.labels.tolist()) == [0, 1, 2, 3]
    assert res.inertia == pytest.approx(0.0, abs=1e-9)
    res = gw_kmeans(spaces, 1, seed=0)
    assert np.all(res.labels == 0)
    assert res.centroids[0].size in (4, 5)  # member or barycenter of size round_half_up(4.0)
    with pytest.raises(ParameterError):
        gw_kmeans(spaces, 5)
    with pytest.raises(ParameterError):
        gw_kmeans(spaces, 2, n_init=0)


def test_kmeans_restarts_escape_a_bad_seeding():
    # with this seed the first k-means++ draw puts both seeds in the star class
    spaces, truth = planted_spaces(8)
    single = gw_kmeans(spaces, 2, seed=8, n_init=1)
    multi = gw_kmeans(spaces, 2, seed=8, n_init=5)
    assert adjusted_rand_index(truth, single.labels) < 1.0
    assert adjusted_rand_index(truth, multi.labels) == 1.0
    assert multi.inertia < single.inertia


# ---------------------------------------------------------------- MDS

def test_classical_mds_recovers_planar_configuration():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(10, 2))
    D = np.sqrt(((X[:, None] - X[None]) ** 2).sum(-1))
    Y = classical_mds(D, 2)
    DY = np.sqrt(((Y[:, None] - Y[None]) ** 2).sum(-1))
    assert np.allclose(D, DY, atol=1e-9)


# ---------------------------------------------------------------- studies

def test_sensitivity_examples():
    g = path_graph(3)
    res = neighbor_sensitivity(g, "node", trials=20, seed=0)
    assert len(res.values) == 20 and all(v > 0 for v in res.values)
    res = neighbor_sensitivity(g, "edge", trials=5, seed=0)
    assert all(v > 0 for v in res.values)
    with pytest.raises(PreconditionError):
        neighbor_sensitivity(Graph(3, []), "edge")
    with pytest.raises(PreconditionError):
        neighbor_sensitivity(Graph(1, []), "node")


def test_epsilon_sweep_baseline_row_and_csv(tmp_path):
    rng = np.random.default_rng(0)
    graphs = [random_graph(5, 0.6, rng, labels=rng.integers(0, 2, 5)) for _ in range(4)]
    params = init_params(GCN, 2, 4, 3, seed=0)
    rows = epsilon_sweep(graphs, params, [0, "default", 50.0], repeats=2, num_node_classes=2)
    assert [r.epsilon for r in rows] == [0, "default", 50.0]
    assert rows[0].count == 2 * 6 and rows[0].std >= 0
    again = epsilon_sweep(graphs, params, [0], repeats=1, num_node_classes=2)
    assert again[0].mean == pytest.approx(rows[0].mean, rel=1e-12)
    out = tmp_path / "sweep.csv"
    write_sweep_csv(rows, out)
    assert out.read_text().splitlines()[0] == "epsilon,mean_gw,std_gw,count"
