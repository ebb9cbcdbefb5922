from fractions import Fraction as F

import numpy as np
from hypothesis import given, strategies as st

from chromysamp.errors import NonTermination
from chromysamp.frame import build_frame, validate_params
from chromysamp.pivotal import duel, pivotal_sample, pivotal_steps, settle

from conftest import float_params, rational_params


def test_rejection_step():
    p, win, lose = duel(F(2, 5), F(1, 2), True)
    assert p == F(4, 9)
    assert win == (F(9, 10), 0) and lose == (0, F(9, 10))


def test_selection_step():
    p, win, lose = duel(F(3, 5), F(4, 5), True)
    # (1 - 0.8) / (2 - 1.4)
    assert p == F(1, 3)
    assert win == (1, F(2, 5)) and lose == (F(2, 5), 1)


def test_total_of_exactly_one_is_rejection():
    p, win, lose = duel(F(3, 10), F(7, 10), True)
    assert p == F(3, 10) and win == (1, 0) and lose == (0, 1)


def test_float_residual_snapping():
    assert settle(1e-14, False) == 0.0
    assert settle(1 - 1e-14, False) == 1.0
    assert settle(0.5, False) == 0.5
    assert settle(F(1, 10**20), True) == F(1, 10**20)


def test_first_duel(five_units):
    frame = build_frame(five_units)
    k, l, rk, rl = next(pivotal_steps(frame, iter([0.0])))
    # 0.4 + 0.8 > 1: unit 1 wins with (1 - 0.8) / (2 - 1.2) = 1/4 and keeps 1
    assert (k, l, rk, rl) == (1, 2, 1, F(1, 5))


def test_one_duel_for_two_units():
    frame = build_frame(validate_params(["0.5", "0.5"]))
    assert len(list(pivotal_steps(frame, iter([0.1] * 5)))) == 1


def test_non_termination_payload():
    payload = NonTermination(5, 4).to_dict()
    assert payload["error"] == "NonTermination" and payload["limit"] == 4


@given(rational_params(max_N=12), st.integers(0, 2**32 - 1))
def test_exact_and_float_agree(params, seed):
    exact = pivotal_sample(build_frame(params), seed)
    flt = pivotal_sample(build_frame(validate_params(params.as_floats(), "float")), seed)
    assert exact.selected == flt.selected


@given(float_params(max_N=200), st.integers(0, 2**32 - 1))
def test_fixed_size_and_duel_count(params, seed):
    frame = build_frame(params)
    rng = np.random.default_rng(seed)
    steps = list(pivotal_steps(frame, iter(rng.random(params.N))))
    assert len(steps) <= params.N - 1
    assert len(pivotal_sample(frame, seed)) == params.n
