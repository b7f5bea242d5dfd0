import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fedgw.errors import DomainError, ParameterError
from fedgw.graph import Graph
from fedgw.ldp import (
    EmbeddingMatrix,
    EncodedEmbedding,
    cell_exponent,
    default_epsilon,
    encode_cells,
    ldp_ratio_probe,
    multibit_encode,
    optimal_m,
    plus_probability,
)


def closed_form_p(v, a, b, x):
    # written straight from the mechanism's definition
    e = math.exp(x)
    return 1 / (e + 1) + (v - a) / (b - a) * (e - 1) / (e + 1)


def test_optimal_m_examples():
    assert optimal_m(1, 7) == 1
    assert optimal_m(10, 3) == 3
    assert optimal_m(4.36, 7) == 2


def test_default_epsilon():
    assert default_epsilon(Graph(4, [])) == 0.25
    assert default_epsilon(Graph(1, [])) == 1.0
    assert default_epsilon(Graph(17, [])) == 1 / 17


@pytest.mark.parametrize("v,x", [(0.0, 0.5), (0.3, 1.0), (1.0, 2.0), (0.77, 1e-3)])
def test_plus_probability_matches_definition(v, x):
    assert plus_probability(np.array(v), 0.0, 1.0, x) == pytest.approx(closed_form_p(v, 0, 1, x), abs=1e-15)


def test_plus_probability_extreme_exponent_is_finite():
    assert plus_probability(np.array(0.0), 0, 1, 800.0) == 0.0
    assert plus_probability(np.array(1.0), 0, 1, 800.0) == 1.0


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.integers(1, 9), st.data())
def test_encoder_alphabet_and_row_counts(n, h, data):
    m = data.draw(st.integers(1, h))
    seed = data.draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    H = EmbeddingMatrix(rng.random((n, h)))
    enc = multibit_encode(H, 0.7, m, seed)
    assert set(np.unique(enc.values)) <= {-1, 0, 1}
    assert np.all(np.count_nonzero(enc.values, axis=1) == m)


def test_encoder_is_deterministic_given_seed():
    H = EmbeddingMatrix(np.random.default_rng(0).random((5, 4)))
    a = multibit_encode(H, 1.0, 2, 11).values
    b = multibit_encode(H, 1.0, 2, 11).values
    assert np.array_equal(a, b)


def test_column_selection_is_uniform():
    H = EmbeddingMatrix(np.full((2000, 5), 0.5))
    enc = multibit_encode(H, 1.0, 2, 0)
    rate = np.count_nonzero(enc.values, axis=0) / 2000
    assert np.allclose(rate, 2 / 5, atol=0.04)


def test_lower_bound_value_gives_minus_one():
    n, m = 4, 1
    H = EmbeddingMatrix(np.zeros((n, 3)))
    eps = 20 * m * n
    enc = multibit_encode(H, eps, m, 0)
    assert np.all(enc.values[enc.values != 0] == -1)
    assert plus_probability(np.array(0.0), 0, 1, 20.0) <= 1e-8


@pytest.mark.parametrize("x", [0.01, 1.0, 5.0])
def test_midpoint_rate_is_half(x):
    rng = np.random.default_rng(1)
    bits = encode_cells(np.full(100_000, 0.5), 0.0, 1.0, x, rng)
    assert abs(np.mean(bits == 1) - 0.5) <= 0.01


def test_encoder_errors():
    H = EmbeddingMatrix(np.zeros((2, 3)))
    with pytest.raises(ParameterError):
        multibit_encode(H, 1.0, 4, 0)
    with pytest.raises(ParameterError):
        multibit_encode(H, 1.0, 0, 0)
    with pytest.raises(ParameterError):
        multibit_encode(H, 0.0, 1, 0)
    with pytest.raises(DomainError):
        EmbeddingMatrix(np.array([[1.5]]))
    with pytest.raises(DomainError):
        EncodedEmbedding(np.array([[1, 1]]), 1.0, 1)


def test_ratio_probe_examples():
    same = ldp_ratio_probe(0.3, 0.3, 0, 1, 1.0, 1, 1, trials=100_000, seed=0)
    assert abs(same.ratio_plus - 1) <= 3 * same.se_plus + 1e-12
    assert abs(same.ratio_minus - 1) <= 3 * same.se_minus + 1e-12
    ext = ldp_ratio_probe(1.0, 0.0, 0, 1, 1.0, 1, 1, trials=100_000, seed=1)
    assert abs(ext.ratio_plus - math.e) <= 3 * ext.se_plus
    assert ext.bound == pytest.approx(math.e)


def test_ratio_probe_flags_unbounded_and_checks_trials():
    r = ldp_ratio_probe(1.0, 0.0, 0, 1, 60.0, 1, 1, trials=10_000, seed=0)
    assert r.unbounded_plus
    with pytest.raises(ParameterError):
        ldp_ratio_probe(0, 0, 0, 1, 1, 1, 1, trials=100)


def test_exponent_bookkeeping_is_exact():
    for eps, m, n in [(1.0, 1, 17), (0.1, 3, 4), (2.0, 2, 9)]:
        x = cell_exponent(eps, m, n)
        assert x == eps / (m * n)
        assert m * n * x == pytest.approx(eps, rel=1e-15)


def test_plus_probability_monotone_in_value():
    grid = np.linspace(0, 1, 21)
    rng = np.random.default_rng(4)
    rates = [np.mean(encode_cells(np.full(20_000, v), 0, 1, 2.0, rng) == 1) for v in grid]
    exact = plus_probability(grid, 0, 1, 2.0)
    assert np.all(np.diff(exact) > 0)
    # empirical rates follow the exact curve within sampling noise
    assert np.all(np.abs(np.array(rates) - exact) < 4 * np.sqrt(0.25 / 20_000))


def test_csv_roundtrip(tmp_path):
    H = EmbeddingMatrix(np.random.default_rng(0).random((4, 3)))
    enc = multibit_encode(H, 0.3, 2, 42)
    enc.to_csv(tmp_path / "e.csv")
    back = EncodedEmbedding.from_csv(tmp_path / "e.csv")
    assert np.array_equal(back.values, enc.values)
    assert (back.epsilon, back.m, back.seed) == (0.3, 2, 42)
