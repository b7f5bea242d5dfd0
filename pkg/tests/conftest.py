import os
from pathlib import Path

import numpy as np
import pytest

for _b in ("PYTORCH", "JAX", "TENSORFLOW", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_b}", "1")

from fedgw.graph import Graph, MetricMeasureSpace, apsp  # noqa: E402

DATA = Path(__file__).parent / "data"
MUTAG_DIR = DATA / "MUTAG"


def path_graph(n, **kw):
    return Graph(n, [(i, i + 1) for i in range(n - 1)], **kw)


def cycle_graph(n, **kw):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)], **kw)


def random_graph(n, p, rng, labels=None):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph(n, edges, node_labels=labels)


def point_cloud_space(n, rng, dim=2, uniform=True):
    X = rng.normal(size=(n, dim))
    C = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(C, 0.0)
    C = 0.5 * (C + C.T)
    if uniform:
        return MetricMeasureSpace.uniform(C)
    p = rng.random(n) + 0.2
    p /= p.sum()
    p[-1] = 1.0 - p[:-1].sum()
    return MetricMeasureSpace(C, p)


@pytest.fixture(scope="session")
def mutag():
    from fedgw.datasets import load_tu_dataset

    return load_tu_dataset(MUTAG_DIR, "MUTAG")



def planted_spaces(seed, n_each=5, noise=0.1):
    """Jittered, relabelled copies of cycle (class 0) and star (class 1) hop metrics on 6-7 nodes."""
    rng = np.random.default_rng(seed)
    spaces, labels = [], []
    for cls in (0, 1):
        for _ in range(n_each):
            n = int(rng.integers(6, 8))
            edges = [(i, (i + 1) % n) for i in range(n)] if cls == 0 else [(0, i) for i in range(1, n)]
            C = np.array(apsp(Graph(n, edges)).cost)
            N = rng.uniform(-noise, noise, C.shape)
            C = (C + (N + N.T) / 2) * (1 - np.eye(n))
            perm = rng.permutation(n)
            spaces.append(MetricMeasureSpace.uniform(C[np.ix_(perm, perm)]))
            labels.append(cls)
    return spaces, np.array(labels)


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one acceptance line; the terminal summary repeats them all."""

    def _record(number, ok, detail):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append((number, line))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
