from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chromysamp.chromy import (
    ChromyStream,
    chromy_batch,
    chromy_path,
    chromy_sample,
    chromy_stream,
    draw_start,
    randomized_chromy_batch,
    randomized_chromy_sample,
    rotation_profiles,
    selection_probability,
)
from chromysamp.errors import InvariantViolation, NonIntegerTotal, ProbOutOfRange
from chromysamp.frame import build_frame, validate_params

from conftest import float_params, rational_params


def test_step_b_after_selection(five_units):
    # unit 1 taken, unit 2 is cross-border: V_2^F / V_1^F = 0.2 / 0.4
    frame = build_frame(five_units)
    V_frac = frame.profile.V_frac
    assert selection_probability(V_frac[1], V_frac[2], behind=False) == F(1, 2)
    assert selection_probability(V_frac[1], V_frac[2], behind=True) == 1


def test_step_a_probabilities(five_units):
    V_frac = build_frame(five_units).profile.V_frac
    assert selection_probability(V_frac[0], V_frac[1], True) == F(2, 5)
    # unit 3 after 1 selection at V_2 = 1.2: (0.7 - 0.2) / 0.8
    assert selection_probability(V_frac[2], V_frac[3], True) == F(5, 8)
    assert selection_probability(V_frac[2], V_frac[3], False) == 0


def test_zero_denominator_is_corruption():
    with pytest.raises(InvariantViolation):
        # unit 1 forced in, so unit 2 is a step (b) from an integer sum while ahead
        chromy_path([F(1, 2), F(1, 2)], [0, 0, 0], [F(0), F(0), F(0)], [0.5, 0.5])


def test_path_flags_broken_bounds():
    # a profile that forces two selections while V^I stays at 0
    with pytest.raises(InvariantViolation):
        chromy_path([F(1, 2), F(1, 2)], [0, 0, 0], [F(0), F(1, 2), F(1, 2)], [0.0, 0.0])


def test_sample_has_fixed_size(n8):
    frame = build_frame(n8)
    for seed in range(50):
        assert len(chromy_sample(frame, seed)) == 4


@given(rational_params(max_N=12), st.integers(0, 2**32 - 1))
def test_exact_and_float_draws_coincide(params, seed):
    exact = build_frame(params)
    flt = build_frame(validate_params([float(p) for p in params.probs], "float"))
    assert chromy_sample(exact, seed).selected == chromy_sample(flt, seed).selected
    a = randomized_chromy_sample(exact, seed)
    b = randomized_chromy_sample(flt, seed)
    assert a.selected == b.selected and a.permutation_start == b.permutation_start


@given(float_params(max_N=300), st.integers(0, 2**32 - 1))
def test_running_count_bounds(params, seed):
    frame = build_frame(params)
    s = chromy_sample(frame, seed)
    ind = np.zeros(params.N, dtype=int)
    ind[np.asarray(s.selected) - 1] = 1
    counts = np.cumsum(ind)
    V_int = np.asarray(frame.profile.V_int[1:])
    assert np.all((V_int <= counts) & (counts <= V_int + 1))
    assert counts[-1] == params.n


@given(float_params(max_N=200), st.integers(0, 2**32 - 1), st.integers(1, 50))
def test_stream_matches_frame_path(params, seed, chunk):
    whole = chromy_sample(build_frame(params), seed).selected
    streamed = chromy_stream(enumerate(params.probs, start=1), seed, chunk_size=chunk).selected
    assert tuple(streamed) == whole


def test_stream_with_ids_and_total_check():
    stream = ChromyStream(3)
    stream.feed([0.5, 0.5], ids=["a", "b"])
    stream.feed([0.25, 0.75], ids=["c", "d"])
    assert len(stream.finish()) == 2
    bad = ChromyStream(3)
    bad.feed([0.5, 0.6])
    with pytest.raises(NonIntegerTotal):
        bad.finish()
    with pytest.raises(ProbOutOfRange):
        ChromyStream(3).feed([0.5, 1.0])


def test_start_probability_is_pi_over_n(n8):
    # sigma_3 is chosen iff u0 * 4 lies in [V_2, V_3) = [0.6, 1.3)
    assert draw_start(n8, 0.149999) == 2
    assert draw_start(n8, 0.150001) == 3
    assert draw_start(n8, 0.324999) == 3
    assert draw_start(n8, 0.325) == 4
    assert F("0.325") - F("0.15") == F(7, 40)


def test_start_frequencies(n8):
    rng = np.random.default_rng(11)
    u = rng.random(20_000)
    V = build_frame(n8).profile.V
    starts = np.array([draw_start(n8, x, V) for x in u])
    freq = np.bincount(starts, minlength=9)[1:] / starts.size
    expected = np.array([float(p) for p in n8.probs]) / 4
    assert np.all(np.abs(freq - expected) < 4 * np.sqrt(expected * (1 - expected) / starts.size))


@pytest.mark.parametrize("mode", ["exact", "float"])
def test_batch_equals_sequential_draws(n8, mode):
    params = n8 if mode == "exact" else validate_params(n8.as_floats(), "float")
    member, starts = randomized_chromy_batch(params, 40, np.random.default_rng(5))
    rng = np.random.default_rng(5)
    frame = build_frame(params)
    for row, start in zip(member, starts):
        s = randomized_chromy_sample(frame, rng)
        assert s.permutation_start == start
        assert tuple(np.flatnonzero(row) + 1) == s.selected


def test_batch_kernel_matches_scalar_path(five_units):
    frame = build_frame(five_units)
    fr = np.asarray(frame.profile.V_frac, dtype=float)
    u = np.random.default_rng(2).random((300, 5))
    out = chromy_batch(np.tile(fr[:-1], (300, 1)), np.tile(fr[1:], (300, 1)), u)
    for row, uu in zip(out, u):
        ind = chromy_path(frame.probs, frame.profile.V_int, frame.profile.V_frac, uu)
        assert row.astype(int).tolist() == ind


def test_rotation_profiles_rows(n8):
    prev, cur = rotation_profiles(n8)
    assert prev.shape == (8, 8)
    # rotation starting at unit 1 is the population itself
    assert np.allclose(cur[0], [float(x) for x in build_frame(n8).profile.V_frac[1:]])
    assert np.all(prev[:, 0] == 0)


def test_seed_reproducibility(n8):
    frame = build_frame(n8)
    assert randomized_chromy_sample(frame, 99) == randomized_chromy_sample(frame, 99)
    assert randomized_chromy_sample(frame, 99).seed == 99
