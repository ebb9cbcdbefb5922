"""Design parameters, cumulated probabilities and cross-border geometry.

Units are labelled ``1..N`` throughout the public API.  Two arithmetic modes
are supported: ``"exact"`` stores every probability as a
:class:`fractions.Fraction` (decimal strings are parsed verbatim), ``"float"``
stores IEEE doubles and accumulates the cumulated sums with Neumaier's
compensated summation.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Literal, Sequence, Union

import numpy as np

from .errors import EmptyPopulation, NonIntegerTotal, ProbOutOfRange

Number = Union[Fraction, float]
Mode = Literal["exact", "float"]

#: float mode: fractional parts closer than this to 0 or 1 snap to an integer
SNAP_TOL = 1e-9


def to_fraction(value) -> Fraction:
    """Convert ``value`` to a Fraction, reading floats by their decimal repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value).strip())


@dataclass(frozen=True)
class DesignParams:
    probs: tuple
    n: int
    mode: Mode = "exact"

    @property
    def N(self) -> int:
        return len(self.probs)

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def as_floats(self) -> list[float]:
        return [float(p) for p in self.probs]

    def permuted(self, start: int) -> "DesignParams":
        """Probabilities in circular order ``start, ..., N, 1, ..., start-1``."""
        s = start - 1
        return DesignParams(self.probs[s:] + self.probs[:s], self.n, self.mode)


def validate_params(raw_probs: Iterable, mode: Mode = "exact") -> DesignParams:
    """Validate a probability vector and return :class:`DesignParams`.

    Raises :class:`ProbOutOfRange` for entries outside ``(0, 1)`` and
    :class:`NonIntegerTotal` when the sum is not an integer (exactly in
    exact mode, within ``1e-9 * N`` in float mode).
    """
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown arithmetic mode {mode!r}")
    if mode == "exact":
        probs = tuple(to_fraction(p) for p in raw_probs)
    else:
        probs = tuple(float(p) for p in raw_probs)
    if not probs:
        raise EmptyPopulation()
    for k, p in enumerate(probs, start=1):
        if not 0 < p < 1:
            raise ProbOutOfRange(k, p)
    if mode == "exact":
        total = sum(probs, Fraction(0))
        n = round(total)
        if total != n:
            raise NonIntegerTotal(total, n, abs(total - n))
    else:
        total = math.fsum(probs)
        n = round(total)
        if abs(total - n) > 1e-9 * len(probs):
            raise NonIntegerTotal(total, n, abs(total - n))
    if n < 1:
        raise NonIntegerTotal(total, n, abs(total - n))
    return DesignParams(probs, int(n), mode)


@dataclass(frozen=True)
class CumulativeProfile:
    """``V[k]`` for ``k = 0..N`` split into integer and fractional parts."""

    V: tuple
    V_int: tuple
    V_frac: tuple


def split_cumulative(probs: Sequence[Number], exact: bool) -> CumulativeProfile:
    """Cumulated sums with their integer/fractional split, ``V_0 = 0``."""
    V = [Fraction(0) if exact else 0.0]
    V_int = [0]
    V_frac = [V[0]]
    if exact:
        acc = Fraction(0)
        for p in probs:
            acc += p
            i = math.floor(acc)
            V.append(acc)
            V_int.append(i)
            V_frac.append(acc - i)
    else:
        arr = np.asarray(probs, dtype=np.float64)
        ints, fracs, _, _ = float_cumulative(arr, 0.0, 0.0)
        V_int.extend(int(i) for i in ints)
        V_frac.extend(float(f) for f in fracs)
        V.extend(float(i + f) for i, f in zip(ints, fracs))
    return CumulativeProfile(tuple(V), tuple(V_int), tuple(V_frac))


def float_cumulative(
    probs: np.ndarray, s0: float, c0: float
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Neumaier-compensated running sums of ``probs`` continuing from ``(s0, c0)``.

    Returns integer parts, fractional parts (snapped within ``SNAP_TOL`` of an
    integer) and the updated ``(running sum, compensation)`` pair.
    """
    if probs.size == 0:
        return np.empty(0, np.int64), np.empty(0), s0, c0
    s = np.cumsum(np.concatenate(([s0], probs)))
    prev, s = s[:-1], s[1:]
    err = np.where(
        np.abs(prev) >= np.abs(probs), (prev - s) + probs, (probs - s) + prev
    )
    c = c0 + np.cumsum(err)
    ints = np.floor(s)
    fracs = (s - ints) + c
    low = fracs < 0.0
    high = fracs >= 1.0
    ints = ints - low + high
    fracs = fracs + low - high
    up = fracs > 1.0 - SNAP_TOL
    ints = ints + up
    fracs[up | (fracs < SNAP_TOL)] = 0.0
    return ints.astype(np.int64), fracs, float(s[-1]), float(c[-1])


@dataclass(frozen=True)
class Frame:
    """Cross-border structure of a population.

    ``cross_border[i-1]`` is the unit ``k_i`` (``i = 1..n-1``) whose cumulated
    interval ``[V_{k-1}, V_k)`` contains the integer ``i``; ``a[i-1]`` and
    ``b[i-1]`` are the parts of its probability below and above ``i``.
    ``microstrata[i-1] = (first, last)`` is the inclusive unit range of
    microstratum ``i``; consecutive microstrata share their cross-border unit.
    """

    params: DesignParams
    profile: CumulativeProfile
    cross_border: tuple
    a: tuple
    b: tuple
    microstrata: tuple

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def probs(self) -> tuple:
        return self.params.probs

    _cb_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        idx = {k: i for i, k in enumerate(self.cross_border, start=1)}
        object.__setattr__(self, "_cb_index", idx)

    def is_cross_border(self, k: int) -> bool:
        return k in self._cb_index

    def cross_border_rank(self, k: int) -> int | None:
        """``i`` such that ``k = k_i``, or None for a non-cross-border unit."""
        return self._cb_index.get(k)

    def microstratum_of(self, k: int) -> int:
        """Microstratum of a non-cross-border unit ``k``."""
        if k in self._cb_index:
            raise ValueError(f"unit {k} is cross-border and lies in two microstrata")
        return 1 + bisect.bisect_left(self.cross_border, k)


def build_frame(params: DesignParams) -> Frame:
    """Compute the cumulative profile, cross-border units and microstrata."""
    exact = params.exact
    profile = split_cumulative(params.probs, exact)
    if not exact:
        # the validated total is within tolerance of n: pin it
        V = list(profile.V)
        V_int = list(profile.V_int)
        V_frac = list(profile.V_frac)
        V[-1], V_int[-1], V_frac[-1] = float(params.n), params.n, 0.0
        profile = CumulativeProfile(tuple(V), tuple(V_int), tuple(V_frac))
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    cross, a, b = [], [], []
    for k in range(1, params.N + 1):
        prev_int, prev_frac = profile.V_int[k - 1], profile.V_frac[k - 1]
        # smallest integer i >= V_{k-1}
        i = prev_int + (1 if prev_frac > 0 else 0)
        if i < 1 or i > params.n - 1:
            continue
        # V_k > i, read off the (snapped) split so float mode stays consistent
        if profile.V_int[k] == i and profile.V_frac[k] > 0:
            cross.append(k)
            a.append(one - prev_frac if prev_frac > 0 else zero)
            b.append(profile.V_frac[k])
    bounds = [0, *cross, params.N + 1]
    micro = tuple(
        (max(1, bounds[i - 1]), min(params.N, bounds[i]))
        for i in range(1, params.n + 1)
    )
    return Frame(params, profile, tuple(cross), tuple(a), tuple(b), micro)
