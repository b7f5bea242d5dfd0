import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fedgw.errors import FormatError, PreconditionError
from fedgw.graph import DatasetBundle, Graph, MetricMeasureSpace, apsp, khop_subgraph

from conftest import path_graph, random_graph


def test_graph_rejects_self_loops_and_out_of_range():
    with pytest.raises(FormatError):
        Graph(3, [(1, 1)])
    with pytest.raises(FormatError):
        Graph(3, [(0, 3)])
    with pytest.raises(FormatError):
        Graph(0, [])


def test_graph_deduplicates_orientations():
    g = Graph(3, [(0, 1), (1, 0), (2, 1)])
    assert g.sorted_edges() == [(0, 1), (1, 2)]


def test_graph_shape_checks():
    with pytest.raises(FormatError):
        Graph(2, [(0, 1)], features=np.zeros((3, 1)))
    with pytest.raises(FormatError):
        Graph(2, [(0, 1)], node_labels=[0])
    assert Graph(2, [(0, 1)]).features.shape == (2, 0)


def test_graph_is_read_only():
    g = Graph(2, [(0, 1)], features=np.ones((2, 2)))
    with pytest.raises(ValueError):
        g.features[0, 0] = 5


def test_metric_measure_space_validation():
    MetricMeasureSpace.uniform([[0, 1], [1, 0]])
    with pytest.raises(PreconditionError):
        MetricMeasureSpace.uniform([[1, 1], [1, 0]])
    with pytest.raises(PreconditionError):
        MetricMeasureSpace.uniform([[0, 1], [2, 0]])
    with pytest.raises(PreconditionError):
        MetricMeasureSpace([[0, 1], [1, 0]], [0.5, 0.6])
    with pytest.raises(PreconditionError):
        MetricMeasureSpace([[0, 1], [1, 0]], [1.0, 0.0])


def test_dataset_bundle_class_count_invariant():
    g = Graph(2, [(0, 1)], node_labels=[0, 2])
    assert DatasetBundle([g], "x", 3).num_node_classes == 3
    with pytest.raises(FormatError):
        DatasetBundle([g], "x", 2)


def test_apsp_examples():
    tri = apsp(Graph(3, [(0, 1), (1, 2), (0, 2)]))
    assert np.array_equal(tri.cost, 1 - np.eye(3))
    p3 = apsp(path_graph(3))
    assert np.array_equal(p3.cost, [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert np.allclose(p3.measure, 1 / 3)
    iso = apsp(Graph(2, []))
    assert np.array_equal(iso.cost, [[0, 2], [2, 0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 14), st.integers(0, 10_000))
def test_apsp_triangle_inequality_on_connected_graphs(n, seed):
    rng = np.random.default_rng(seed)
    # a random spanning tree plus extra edges keeps the graph connected
    edges = [(int(rng.integers(i)), i) for i in range(1, n)]
    edges += [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.2]
    C = apsp(Graph(n, edges)).cost
    for k in range(n):
        assert np.all(C <= C[:, [k]] + C[[k], :] + 1e-12)


def test_khop_examples():
    star = Graph(4, [(0, 1), (0, 2), (0, 3)], node_labels=[1, 0, 0, 0])
    sub, label = khop_subgraph(star, 0, 1)
    assert sub.node_count == 4 and label == 1
    p4 = path_graph(4, node_labels=[0, 1, 0, 1])
    sub, label = khop_subgraph(p4, 0, 1)
    assert sub.node_count == 2 and sub.sorted_edges() == [(0, 1)] and label == 0
    assert sub.graph_label == 0


def test_khop_center_is_local_zero_and_bfs_order():
    g = Graph(5, [(2, 4), (2, 0), (2, 3), (0, 1)], node_labels=[0, 1, 2, 3, 4])
    sub, label = khop_subgraph(g, 2, 1)
    assert label == 2
    # center first, then neighbours in ascending id
    assert list(sub.node_labels) == [2, 0, 3, 4]


def test_khop_needs_labels():
    with pytest.raises(PreconditionError):
        khop_subgraph(path_graph(3), 0, 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10_000))
def test_khop_monotone_and_reaches_component(n, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(n, 0.25, rng, labels=np.zeros(n, dtype=int))
    c = int(rng.integers(n))
    sizes = [khop_subgraph(g, c, k)[0].node_count for k in range(1, n + 1)]
    assert sizes == sorted(sizes)
    component = int(np.sum(apsp(g).cost[c] < n))
    assert sizes[-1] == component


def test_permuted_graph_relabels():
    g = Graph(3, [(0, 1)], node_labels=[5, 6, 7])
    h = g.permuted([2, 0, 1])
    assert h.sorted_edges() == [(0, 2)]
    assert list(h.node_labels) == [6, 7, 5]
