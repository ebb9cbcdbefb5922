"""Exact enumeration of sampling designs by probability-tree traversal.

Ground truth for design equivalence, joint inclusion probabilities and
estimator unbiasedness on small populations.  Everything is rational.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .chromy import selection_probability
from .clusters import build_clustered
from .errors import DimensionMismatch, PopulationTooLarge, ValidationError
from .frame import DesignParams, build_frame, split_cumulative
from .pivotal import duel

SAMPLERS = ("chromy", "pivotal", "two-stage", "randomized-chromy")
DEFAULT_CAP = 12


@dataclass(frozen=True)
class DesignDistribution:
    """Exact law over samples; keys are sorted tuples of unit labels."""

    probs: dict
    sampler: str
    N: int
    n: int

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0))

    def tv_distance(self, other: "DesignDistribution") -> Fraction:
        keys = set(self.probs) | set(other.probs)
        diff = sum(
            (abs(self.probs.get(s, Fraction(0)) - other.probs.get(s, Fraction(0))) for s in keys),
            Fraction(0),
        )
        return diff / 2

    def to_json(self, labels: Sequence | None = None) -> dict:
        """``{"1,2,4": "3/35", ...}`` using ``labels`` for unit names if given."""
        name = (lambda k: str(labels[k - 1])) if labels is not None else str
        return {
            ",".join(name(k) for k in s): f"{p.numerator}/{p.denominator}"
            for s, p in sorted(self.probs.items())
        }


def _exact(params: DesignParams) -> DesignParams:
    if not params.exact:
        raise ValidationError("enumeration requires exact (rational) parameters")
    return params


def _chromy_leaves(probs: Sequence[Fraction]) -> dict:
    """Depth-first Chromy tree on any vector in [0, 1]; zero units are skipped."""
    profile = split_cumulative(probs, True)
    V_int, V_frac = profile.V_int, profile.V_frac
    leaves: dict = defaultdict(Fraction)
    N = len(probs)

    def walk(k: int, count: int, chosen: tuple, weight: Fraction) -> None:
        if k > N:
            leaves[chosen] += weight
            return
        if probs[k - 1] == 0:
            walk(k + 1, count, chosen, weight)
            return
        p = Fraction(selection_probability(V_frac[k - 1], V_frac[k], count == V_int[k - 1]))
        if p > 0:
            walk(k + 1, count + 1, chosen + (k,), weight * p)
        if p < 1:
            walk(k + 1, count, chosen, weight * (1 - p))

    walk(1, 0, (), Fraction(1))
    return dict(leaves)


def _pivotal_leaves(probs: Sequence[Fraction]) -> dict:
    leaves: dict = defaultdict(Fraction)
    N = len(probs)

    def walk(l: int, carry, chosen: tuple, weight: Fraction) -> None:
        if l > N:
            if carry is not None:
                raise AssertionError("undecided unit at the end of the population")
            leaves[tuple(sorted(chosen))] += weight
            return
        pl = probs[l - 1]
        if carry is None:
            walk(l + 1, (l, pl), chosen, weight)
            return
        k, pk = carry
        p, win, lose = duel(pk, pl, True)
        for branch, outcome in ((p, win), (1 - p, lose)):
            if branch == 0:
                continue
            rk, rl = outcome
            nxt = chosen + tuple(u for u, r in ((k, rk), (l, rl)) if r == 1)
            new_carry = next(((u, r) for u, r in ((k, rk), (l, rl)) if 0 < r < 1), None)
            walk(l + 1, new_carry, nxt, weight * branch)

    walk(1, None, (), Fraction(1))
    return dict(leaves)


def _two_stage_leaves(params: DesignParams) -> dict:
    frame = build_frame(params)
    if frame.n < 2:
        return _chromy_leaves(params.probs)
    clustered = build_clustered(frame)
    leaves: dict = defaultdict(Fraction)
    for cl_sample, w in _chromy_leaves(clustered.phi).items():
        options = [
            [(k, params.probs[k - 1] / clustered.phi[j - 1]) for k in clustered.clusters[j - 1]]
            for j in cl_sample
        ]
        for combo in product(*options):
            p = w
            for _, q in combo:
                p *= q
            leaves[tuple(sorted(k for k, _ in combo))] += p
    return dict(leaves)


def _randomized_leaves(params: DesignParams) -> dict:
    N, n = params.N, params.n
    leaves: dict = defaultdict(Fraction)
    for start in range(1, N + 1):
        w = params.probs[start - 1] / n
        for s, p in _chromy_leaves(params.permuted(start).probs).items():
            original = tuple(sorted((start - 1 + j - 1) % N + 1 for j in s))
            leaves[original] += w * p
    return dict(leaves)


def enumerate_design(
    sampler: str, params: DesignParams, cap: int = DEFAULT_CAP
) -> DesignDistribution:
    """Complete design of ``sampler`` on ``params`` (exact mode, ``N <= cap``)."""
    params = _exact(params)
    if params.N > cap:
        raise PopulationTooLarge(params.N, cap)
    if sampler == "chromy":
        leaves = _chromy_leaves(params.probs)
    elif sampler == "pivotal":
        leaves = _pivotal_leaves(params.probs)
    elif sampler == "two-stage":
        leaves = _two_stage_leaves(params)
    elif sampler == "randomized-chromy":
        leaves = _randomized_leaves(params)
    else:
        raise ValidationError(f"unknown sampler {sampler!r}; expected one of {SAMPLERS}")
    leaves = {s: p for s, p in leaves.items() if p != 0}
    return DesignDistribution(leaves, sampler, params.N, params.n)


@dataclass(frozen=True)
class DesignMoments:
    first_order: tuple
    joint: np.ndarray  # object array of Fractions, diagonal = first order
    ht_mean: Fraction | None = None
    ht_variance: Fraction | None = None


def design_moments(dist: DesignDistribution, y: Sequence | None = None, probs=None) -> DesignMoments:
    """Exact first/second-order inclusion probabilities and HT moments.

    ``probs`` (the design parameter) is needed for the Horvitz-Thompson
    moments; by default the enumerated first-order probabilities are used.
    """
    N = dist.N
    joint = np.full((N, N), Fraction(0), dtype=object)
    for s, p in dist.probs.items():
        idx = [k - 1 for k in s]
        joint[np.ix_(idx, idx)] += p
    first = tuple(joint[k, k] for k in range(N))
    if y is None:
        return DesignMoments(first, joint)
    if len(y) != N:
        raise DimensionMismatch(N, len(y), "y")
    pis = first if probs is None else tuple(Fraction(p) for p in probs)
    yq = [Fraction(v) for v in y]
    mean = Fraction(0)
    second = Fraction(0)
    for s, p in dist.probs.items():
        ht = sum((yq[k - 1] / pis[k - 1] for k in s), Fraction(0))
        mean += p * ht
        second += p * ht * ht
    return DesignMoments(first, joint, mean, second - mean * mean)
