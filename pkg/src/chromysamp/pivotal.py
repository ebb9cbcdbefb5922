"""Ordered pivotal sampling: duels between the two first undecided units.

One uniform is consumed per duel, in duel order; the first unit of the pair
wins the duel when the uniform falls below the duel probability ``p(t)``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator

from .chromy import Sample, as_generator
from .errors import CorruptionError, NonTermination
from .frame import Frame

#: float mode: residuals this close to 0 or 1 are treated as decided
RESIDUAL_TOL = 1e-12


def duel(pk, pl, exact: bool) -> tuple:
    """Outcomes of one duel between residuals ``pk`` (first) and ``pl``.

    Returns ``(prob_first_wins, (first, second) if first wins,
    (first, second) otherwise)``.  The boundary ``pk + pl == 1`` is a
    rejection step.
    """
    total = pk + pl
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    if not exact and abs(total - 1.0) <= RESIDUAL_TOL:
        total = 1.0
    if total <= 1:
        # rejection step: the winner absorbs both masses
        return pk / total, (total, zero), (zero, total)
    # selection step: the winner is taken, the loser keeps the excess
    rest = total - 1
    return (1 - pl) / (2 - pk - pl), (one, rest), (rest, one)


def settle(value, exact: bool):
    """Snap a float residual to 0 or 1 when within tolerance."""
    if exact:
        return value
    if abs(value) <= RESIDUAL_TOL:
        return 0.0
    if abs(value - 1.0) <= RESIDUAL_TOL:
        return 1.0
    return value


def pivotal_steps(frame: Frame, uniforms: Iterator[float]):
    """Run the duels; yields ``(first, second, residual_first, residual_second)``.

    The caller supplies the uniforms; at most ``N - 1`` are drawn.  Only the
    current undecided unit is carried, so the pass is a single forward scan.
    """
    exact = frame.params.exact
    limit = frame.N - 1
    carry = None
    steps = 0
    for l, pl in enumerate(frame.probs, start=1):
        if carry is None:
            carry = (l, pl)
            continue
        k, pk = carry
        steps += 1
        if steps > limit:
            raise NonTermination(steps, limit)
        p, win, lose = duel(pk, pl, exact)
        rk, rl = win if next(uniforms) < p else lose
        rk, rl = settle(rk, exact), settle(rl, exact)
        yield k, l, rk, rl
        carry = None
        for unit, r in ((k, rk), (l, rl)):
            if 0 < r < 1:
                carry = (unit, r)
    if carry is not None:
        raise CorruptionError(f"unit {carry[0]} left undecided with residual {carry[1]}")


def pivotal_sample(frame: Frame, rng=None) -> Sample:
    """Draw one ordered pivotal sample."""
    gen, seed = as_generator(rng)

    def draws():
        while True:
            yield float(gen.random())

    selected = []
    for k, l, rk, rl in pivotal_steps(frame, draws()):
        if rk == 1:
            selected.append(k)
        if rl == 1:
            selected.append(l)
    return Sample(tuple(sorted(selected)), None, seed)
