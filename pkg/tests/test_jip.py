from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given

from chromysamp.frame import build_frame, validate_params
from chromysamp.jip import (
    MONTE_CARLO,
    PERMUTATION_AVERAGED,
    CLOSED_FORM,
    chromy_matrix,
    monte_carlo_matrix,
    randomized_matrix,
    second_order_chromy,
)

from conftest import float_params, reference_entry, rational_params


def test_spot_values(five_units):
    frame = build_frame(five_units)
    assert second_order_chromy(frame, 1, 3) == F(1, 8)
    assert second_order_chromy(frame, 4, 5) == F(3, 10)
    assert second_order_chromy(frame, 3, 1) == F(1, 8)


def test_same_microstratum_interior_pair_is_zero():
    # units 1 and 2 both lie strictly inside the first microstratum
    frame = build_frame(validate_params(["0.3", "0.4", "0.6", "0.7"]))
    assert second_order_chromy(frame, 1, 2) == 0


def test_diagonal_is_rejected(five_units):
    with pytest.raises(ValueError):
        second_order_chromy(build_frame(five_units), 2, 2)


def test_matrix_provenance(five_units):
    assert chromy_matrix(build_frame(five_units)).provenance == CLOSED_FORM
    assert randomized_matrix(five_units).provenance == PERMUTATION_AVERAGED
    mc = monte_carlo_matrix(five_units, 10, 0)
    assert mc.provenance_record() == {"provenance": MONTE_CARLO, "N": 5, "draws": 10}


def test_n8_randomized_matrix(n8):
    M = randomized_matrix(n8)
    for k in range(1, 9):
        for l in range(1, 9):
            if k != l:
                assert abs(float(M[k, l]) - reference_entry(k, l)) <= 0.0005
    assert M[1, 2] == M[2, 1]


def _margins(M, probs, n):
    N = len(probs)
    for k in range(N):
        assert M[k, k] == probs[k]
        assert sum((M[k, l] for l in range(N) if l != k), 0 * probs[k]) == (n - 1) * probs[k]


@given(rational_params())
def test_chromy_matrix_margins(params):
    M = chromy_matrix(build_frame(params)).values
    _margins(M, params.probs, params.n)
    assert all(M[k, l] == M[l, k] for k in range(params.N) for l in range(params.N))


@given(rational_params(max_N=7))
def test_randomized_matrix_margins(params):
    _margins(randomized_matrix(params).values, params.probs, params.n)


@given(rational_params())
def test_float_path_matches_case_dispatch(params):
    exact = chromy_matrix(build_frame(params)).as_float()
    flt = chromy_matrix(build_frame(validate_params(params.as_floats(), "float"))).values
    assert np.allclose(exact, flt, atol=1e-12)


@given(float_params(max_N=40))
def test_float_matrix_bounds(params):
    M = randomized_matrix(params).values
    pi = np.asarray(params.probs)
    off = ~np.eye(params.N, dtype=bool)
    assert np.all(M[off] >= -1e-12)
    assert np.all(M[off] <= np.outer(pi, pi)[off] + 1e-12)
    assert np.allclose(M.sum(axis=1) - pi, (params.n - 1) * pi)


def test_randomized_matrix_thread_invariance():
    rnd = np.random.default_rng(1)
    w = rnd.random(150) + 0.1
    params = validate_params((10 * w / w.sum()).tolist(), "float")
    one = randomized_matrix(params, workers=1).values
    two = randomized_matrix(params, workers=3).values
    assert np.array_equal(one, two)


def test_monte_carlo_shards_do_not_depend_on_workers(n8):
    a = monte_carlo_matrix(n8, 2500, 7, shard_size=1000, workers=1).values
    b = monte_carlo_matrix(n8, 2500, 7, shard_size=1000, workers=3).values
    assert np.array_equal(a, b)
    assert np.allclose(np.diag(a), [float(p) for p in n8.probs], atol=0.05)


def test_monte_carlo_needs_draws(n8):
    with pytest.raises(ValueError):
        monte_carlo_matrix(n8, 0, 1)
