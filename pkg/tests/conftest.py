import random
from fractions import Fraction

import pytest
from hypothesis import assume, settings
from hypothesis import strategies as st

from chromysamp.frame import validate_params

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FIVE_UNITS = ("0.4", "0.8", "0.5", "0.6", "0.7")
N8 = ("0.2", "0.4", "0.7", "0.4", "0.6", "0.6", "0.3", "0.8")

# upper triangle of the 3-decimal reference matrix, row by row
N8_REFERENCE = [
    [0.200, 0.041, 0.133, 0.075, 0.116, 0.108, 0.046, 0.081],
    [0.400, 0.171, 0.142, 0.224, 0.227, 0.099, 0.297],
    [0.700, 0.209, 0.410, 0.415, 0.207, 0.555],
    [0.400, 0.118, 0.224, 0.113, 0.319],
    [0.600, 0.293, 0.165, 0.474],
    [0.600, 0.065, 0.469],
    [0.300, 0.205],
    [0.800],
]


def reference_entry(k, l):
    """1-based lookup into N8_REFERENCE."""
    k, l = min(k, l), max(k, l)
    return N8_REFERENCE[k - 1][l - k]


def random_rational_probs(rnd, max_N=8, denominators=(7, 10, 13, 20)):
    """Probabilities ``m/d`` strictly inside (0, 1) with an integer total."""
    while True:
        N = rnd.randint(2, max_N)
        d = rnd.choice(denominators)
        nums = [rnd.randint(1, d - 1) for _ in range(N - 1)]
        last = (-sum(nums)) % d
        if last:
            return [Fraction(m, d) for m in nums + [last]]


def battery(count, seed=20240601, max_N=8):
    """Deterministic list of exact DesignParams: the fixed examples then random ones."""
    rnd = random.Random(seed)
    out = [validate_params(FIVE_UNITS), validate_params(N8)]
    while len(out) < count:
        out.append(validate_params(random_rational_probs(rnd, max_N)))
    return out


@st.composite
def rational_params(draw, max_N=8, max_d=20):
    N = draw(st.integers(2, max_N))
    d = draw(st.integers(2, max_d))
    nums = draw(st.lists(st.integers(1, d - 1), min_size=N - 1, max_size=N - 1))
    last = (-sum(nums)) % d
    assume(last != 0)
    return validate_params([Fraction(m, d) for m in nums + [last]])


@st.composite
def float_params(draw, max_N=60):
    """Float probabilities whose total is an integer up to rounding."""
    N = draw(st.integers(2, max_N))
    w = draw(st.lists(st.floats(0.05, 1.0), min_size=N, max_size=N))
    n = draw(st.integers(1, max(1, N // 3)))
    total = sum(w)
    probs = [n * x / total for x in w]
    assume(all(0 < p < 1 for p in probs))
    return validate_params(probs, "float")


@pytest.fixture
def five_units():
    return validate_params(FIVE_UNITS)


@pytest.fixture
def n8():
    return validate_params(N8)


# acceptance verdicts, printed once at the end of the session
ACCEPTANCE: list = []


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
    ACCEPTANCE.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
