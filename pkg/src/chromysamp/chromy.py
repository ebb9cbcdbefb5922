"""Chromy's strictly sequential sampling and its randomized variant.

Random-number contract: one uniform ``u_k`` is consumed per unit, in scan
order, and unit ``k`` is taken when ``u_k`` is below its conditional selection
probability.  The randomized variant first consumes one extra uniform ``u_0``
to pick the starting unit (the smallest ``s`` with ``V_s > u_0 * n``).  A
``(seed, population)`` pair therefore fixes the sample.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvariantViolation, NonIntegerTotal, ProbOutOfRange
from .frame import DesignParams, Frame, build_frame, float_cumulative


@dataclass(frozen=True)
class Sample:
    """A fixed-size sample of unit labels (sorted, 1-based)."""

    selected: tuple
    permutation_start: int | None = None
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.selected)

    def __iter__(self) -> Iterator[int]:
        return iter(self.selected)


def as_generator(rng) -> tuple[np.random.Generator, int | None]:
    """Accept a Generator, an int seed or None; return ``(generator, seed)``."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng), None if rng is None else int(rng)
    raise TypeError(f"expected a numpy Generator or an int seed, got {type(rng)}")


def selection_probability(prev_frac, frac, behind: bool):
    """Pr(I_k = 1 | running count) for one Chromy step.

    ``behind`` is True when the running count equals ``V_{k-1}^I`` and False
    when it equals ``V_{k-1}^I + 1``.  Units with zero probability must be
    skipped by the caller.
    """
    if frac > prev_frac:
        # non cross-border step
        if not behind:
            return 0
        return (frac - prev_frac) / (1 - prev_frac)
    # cross-border step
    if behind:
        return 1
    if prev_frac == 0:
        raise ZeroDivisionError("cross-border step from an integer cumulated sum")
    return frac / prev_frac


def chromy_path(
    probs: Sequence, V_int: Sequence[int], V_frac: Sequence, uniforms: Sequence[float]
) -> list[int]:
    """Run the sequential algorithm on a profile; return 0/1 indicators.

    Zero-probability units are never selected.  The running-count bounds
    ``V_k^I <= count <= V_k^I + 1`` are checked after every unit.
    """
    count = 0
    out = []
    for k in range(1, len(probs) + 1):
        if probs[k - 1] == 0:
            I = 0
        else:
            behind = count == V_int[k - 1]
            try:
                p = selection_probability(V_frac[k - 1], V_frac[k], behind)
            except ZeroDivisionError:
                raise InvariantViolation(k, count, (V_int[k - 1], V_int[k - 1])) from None
            I = 1 if uniforms[k - 1] < p else 0
        count += I
        if not V_int[k] <= count <= V_int[k] + 1:
            raise InvariantViolation(k, count, (V_int[k], V_int[k] + 1))
        out.append(I)
    return out


def _kernel(
    prev_frac: np.ndarray, frac: np.ndarray, u: np.ndarray, state: int
) -> tuple[np.ndarray, int]:
    """Vectorised Chromy over one chunk.

    ``state`` is ``count - V_{k-1}^I`` (0 or 1) before the chunk.  A step of
    type (a) taken sets the state to 1, a step of type (b) refused sets it to
    0, every other step keeps it; so the state before each unit is the value
    of the most recent forcing event.
    """
    m = u.size
    step_a = frac > prev_frac
    with np.errstate(divide="ignore", invalid="ignore"):
        p_a = (frac - prev_frac) / (1.0 - prev_frac)
        p_b = frac / prev_frac
    take_a = step_a & (u < p_a)
    take_b = ~step_a & (u < p_b)
    forced = take_a | (~step_a & ~take_b)
    last = np.maximum.accumulate(np.where(forced, np.arange(m), -1))
    after = np.where(last >= 0, take_a[np.maximum(last, 0)], bool(state))
    before = np.empty(m, dtype=bool)
    before[0] = bool(state)
    before[1:] = after[:-1]
    selected = np.where(step_a, ~before & take_a, ~before | take_b)
    if np.any(~step_a & before & (prev_frac == 0.0)):
        k = int(np.argmax(~step_a & before & (prev_frac == 0.0)))
        raise InvariantViolation(k + 1, -1, (0, 0))
    return selected, int(after[-1]) if m else state


def _check_counts(selected: np.ndarray, V_int: np.ndarray, count0: int, offset: int) -> int:
    counts = count0 + np.cumsum(selected)
    bad = (counts < V_int) | (counts > V_int + 1)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise InvariantViolation(offset + j + 1, int(counts[j]), (int(V_int[j]), int(V_int[j]) + 1))
    return int(counts[-1]) if counts.size else count0


def _float_indicators(frame: Frame, u: np.ndarray) -> np.ndarray:
    V_int = np.asarray(frame.profile.V_int, dtype=np.int64)
    V_frac = np.asarray(frame.profile.V_frac, dtype=np.float64)
    selected, _ = _kernel(V_frac[:-1], V_frac[1:], u, 0)
    _check_counts(selected, V_int[1:], 0, 0)
    return selected


def chromy_sample(frame: Frame, rng=None) -> Sample:
    """Draw one Chromy sample (N uniforms consumed)."""
    gen, seed = as_generator(rng)
    u = gen.random(frame.N)
    if frame.params.exact:
        ind = chromy_path(frame.probs, frame.profile.V_int, frame.profile.V_frac, u)
        selected = tuple(k for k, I in enumerate(ind, start=1) if I)
    else:
        selected = tuple(int(k) + 1 for k in np.flatnonzero(_float_indicators(frame, u)))
    return Sample(selected, None, seed)


def draw_start(params: DesignParams, u0: float, V: Sequence | None = None) -> int:
    """Start unit ``s`` of the circular permutation, chosen with prob ``pi_s / n``."""
    if V is None:
        V = build_frame(params).profile.V
    x = Fraction(u0) * params.n if params.exact else u0 * params.n
    s = bisect.bisect_right(V, x)
    return min(max(s, 1), params.N)


def rotate_back(positions: Iterable[int], start: int, N: int) -> tuple:
    """Map 1-based positions in the rotated order back to original labels."""
    return tuple(sorted((start - 1 + j - 1) % N + 1 for j in positions))


def randomized_chromy_sample(frame: Frame, rng=None) -> Sample:
    """Chromy sampling after a random circular rotation of the population.

    Consumes ``1 + N`` uniforms.  The permuted frame is rebuilt from scratch.
    """
    gen, seed = as_generator(rng)
    start = draw_start(frame.params, float(gen.random()), frame.profile.V)
    rotated = build_frame(frame.params.permuted(start))
    inner = chromy_sample(rotated, gen)
    return Sample(rotate_back(inner.selected, start, frame.N), start, seed)


class ChromyStream:
    """Forward-only Chromy sampler over chunks of probabilities.

    State is O(1) apart from the selected labels.  The total need not be known
    in advance; :meth:`finish` checks it is an integer.
    """

    def __init__(self, rng=None) -> None:
        self.rng, self.seed = as_generator(rng)
        self._s = 0.0
        self._c = 0.0
        self._int = 0
        self._frac = 0.0
        self._state = 0
        self._count = 0
        self._seen = 0
        self.selected: list = []

    def feed(self, probs, ids=None) -> None:
        """Process the next chunk; ``ids`` defaults to running 1-based labels."""
        p = np.asarray(probs, dtype=np.float64)
        if p.size == 0:
            return
        bad = ~((p > 0.0) & (p < 1.0))
        if np.any(bad):
            j = int(np.argmax(bad))
            raise ProbOutOfRange(self._seen + j + 1, float(p[j]))
        ints, fracs, self._s, self._c = float_cumulative(p, self._s, self._c)
        prev = np.empty_like(fracs)
        prev[0] = self._frac
        prev[1:] = fracs[:-1]
        u = self.rng.random(p.size)
        sel, self._state = _kernel(prev, fracs, u, self._state)
        self._count = _check_counts(sel, ints, self._count, self._seen)
        hits = np.flatnonzero(sel)
        if ids is None:
            self.selected.extend((hits + self._seen + 1).tolist())
        else:
            self.selected.extend(ids[int(j)] for j in hits)
        self._int, self._frac = int(ints[-1]), float(fracs[-1])
        self._seen += p.size

    def finish(self) -> Sample:
        if self._frac != 0.0:
            total = self._int + self._frac
            raise NonIntegerTotal(total, round(total), min(self._frac, 1 - self._frac))
        return Sample(tuple(self.selected), None, self.seed)


def chromy_stream(items: Iterable, rng=None, chunk_size: int = 65536) -> Sample:
    """Chromy sampling over an iterable of ``(unit_id, prob)`` pairs.

    The population is never materialised: pairs are buffered ``chunk_size``
    at a time.  Selected entries are the supplied unit ids, in stream order.
    """
    stream = ChromyStream(rng)
    ids: list = []
    probs: list = []
    for uid, p in items:
        ids.append(uid)
        probs.append(float(p))
        if len(probs) == chunk_size:
            stream.feed(probs, ids)
            ids, probs = [], []
    stream.feed(probs, ids)
    return stream.finish()


def chromy_batch(prev_frac: np.ndarray, frac: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Many independent Chromy draws at once, one per row.

    All arrays are ``(draws, N)`` in scan order; returns a boolean selection
    matrix.  Loops over units, vectorised over draws.
    """
    draws, N = u.shape
    behind = np.ones(draws, dtype=bool)
    out = np.empty((draws, N), dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(N):
            pf, f = prev_frac[:, k], frac[:, k]
            step_a = f > pf
            p = np.where(
                step_a,
                np.where(behind, (f - pf) / (1.0 - pf), 0.0),
                np.where(behind, 1.0, f / pf),
            )
            take = u[:, k] < p
            out[:, k] = take
            # count - V^I after this unit is 1 iff (a) taken or (b) taken while ahead
            behind = np.where(step_a, behind & ~take, ~(~behind & take))
    return out


def rotation_profiles(params: DesignParams) -> tuple[np.ndarray, np.ndarray]:
    """Fractional parts ``V_{k-1}^F`` and ``V_k^F`` for every circular start.

    Row ``s - 1`` holds the profile of the population rotated to start at ``s``.
    """
    N = params.N
    prev = np.empty((N, N))
    cur = np.empty((N, N))
    for s in range(1, N + 1):
        fr = np.asarray(build_frame(params.permuted(s)).profile.V_frac, dtype=np.float64)
        prev[s - 1] = fr[:-1]
        cur[s - 1] = fr[1:]
    return prev, cur


def randomized_chromy_batch(
    params: DesignParams, draws: int, rng, profiles=None
) -> tuple[np.ndarray, np.ndarray]:
    """``draws`` randomized Chromy samples; same stream use as repeated single draws.

    Returns ``(membership, starts)`` where ``membership`` is a boolean
    ``(draws, N)`` matrix in the original unit order.
    """
    N = params.N
    gen, _ = as_generator(rng)
    U = gen.random((draws, N + 1))
    V = build_frame(params).profile.V
    if params.exact:
        starts = np.array([draw_start(params, float(x), V) for x in U[:, 0]], dtype=np.int64)
    else:
        starts = np.clip(np.searchsorted(np.asarray(V), U[:, 0] * params.n, side="right"), 1, N)
    prev, cur = profiles if profiles is not None else rotation_profiles(params)
    rows = starts - 1
    sel = chromy_batch(prev[rows], cur[rows], U[:, 1:])
    # position j of a draw starting at s is original index (s - 1 + j) mod N
    cols = (rows[:, None] + np.arange(N)[None, :]) % N
    member = np.zeros((draws, N), dtype=bool)
    np.put_along_axis(member, cols, sel, axis=1)
    return member, starts
