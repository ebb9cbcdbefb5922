"""Clustered population, two-stage sampling and ordered-sample transitions.

Units are grouped into ``2n - 1`` clusters: even clusters ``u_{2i}`` are the
cross-border singletons ``{k_i}``; odd clusters ``u_{2i-1}`` hold the
non-cross-border units strictly between ``k_{i-1}`` and ``k_i`` (possibly
none).  Chromy sampling on the cluster probabilities followed by one
within-cluster draw proportional to ``pi_k`` gives the Chromy design on units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .chromy import Sample, as_generator, chromy_path
from .errors import DegenerateDenominator, ValidationError
from .frame import Frame, split_cumulative

#: float mode: cluster masses below this are treated as empty
EMPTY_TOL = 1e-12


@dataclass(frozen=True)
class ClusteredPopulation:
    clusters: tuple  # tuple of tuples of unit labels; clusters[j-1] is u_j
    phi: tuple
    exact: bool

    def cluster_of(self) -> dict:
        """Map unit label -> 1-based cluster index."""
        return {k: j for j, members in enumerate(self.clusters, start=1) for k in members}


def build_clustered(frame: Frame) -> ClusteredPopulation:
    if frame.n < 2:
        raise ValidationError("clustered population needs n >= 2")
    exact = frame.params.exact
    bounds = [0, *frame.cross_border, frame.N + 1]
    clusters = []
    phi = []
    for i in range(1, frame.n + 1):
        members = tuple(range(bounds[i - 1] + 1, bounds[i]))
        clusters.append(members)
        masses = [frame.probs[k - 1] for k in members]
        if exact:
            phi.append(sum(masses, Fraction(0)))
        else:
            mass = math.fsum(masses)
            phi.append(0.0 if mass < EMPTY_TOL else mass)
        if i < frame.n:
            k = frame.cross_border[i - 1]
            clusters.append((k,))
            phi.append(frame.probs[k - 1])
    return ClusteredPopulation(tuple(clusters), tuple(phi), exact)


def two_stage_sample(clustered: ClusteredPopulation, frame: Frame, rng=None) -> Sample:
    """Chromy on clusters, then one unit per selected cluster.

    Consumes ``2n - 1`` uniforms for the first stage, then one per selected
    cluster in cluster order.
    """
    gen, seed = as_generator(rng)
    profile = split_cumulative(clustered.phi, clustered.exact)
    u = gen.random(len(clustered.phi))
    ind = chromy_path(clustered.phi, profile.V_int, profile.V_frac, u)
    chosen = []
    for j, hit in enumerate(ind, start=1):
        if not hit:
            continue
        chosen.append(pick_within(clustered, frame, j, float(gen.random())))
    return Sample(tuple(sorted(chosen)), None, seed)


def pick_within(clustered: ClusteredPopulation, frame: Frame, j: int, u: float) -> int:
    """Unit of cluster ``j`` chosen with probability ``pi_k / phi_j`` by inversion."""
    members = clustered.clusters[j - 1]
    phi = clustered.phi[j - 1]
    x = Fraction(u) * phi if clustered.exact else u * phi
    acc = 0
    for k in members:
        acc += frame.probs[k - 1]
        if x < acc:
            return k
    return members[-1]


@dataclass(frozen=True)
class TransitionTable:
    """Conditional laws of the next selected cluster.

    ``rows[(i, j)]`` maps a cluster index ``j'`` to
    ``Pr(X_{i+1} = u_{j'} | X_i = u_j)`` for ``i = 1..n-1``, where
    ``X_1 < ... < X_n`` are the selected clusters in population order.
    ``initial`` is the law of ``X_1``.
    """

    n: int
    initial: dict
    rows: dict

    def row(self, i: int, j: int) -> dict:
        return self.rows[(i, j)]


def transition_table(frame: Frame) -> TransitionTable:
    n = frame.n
    if n < 2:
        raise ValidationError("transition table needs n >= 2")
    exact = frame.params.exact
    zero = Fraction(0) if exact else 0.0
    a = list(frame.a) + [zero]  # a_n = 0
    b = [zero] + list(frame.b)  # b_0 = 0, so b[i] = b_i
    rows = {}
    for i in range(1, n):
        ai, bi, an = a[i - 1], b[i], a[i]
        if 1 - ai == 0:
            raise DegenerateDenominator(i, "1 - a_i")
        if 1 - bi == 0:
            raise DegenerateDenominator(i, "1 - b_i")
        from_odd = {
            2 * i: bi / (1 - ai),
            2 * i + 1: (1 - bi - an) * (1 - ai - bi) / ((1 - ai) * (1 - bi)),
            2 * i + 2: an * (1 - ai - bi) / ((1 - ai) * (1 - bi)),
        }
        if i >= 2:
            rows[(i, 2 * i - 2)] = dict(from_odd)
        rows[(i, 2 * i - 1)] = from_odd
        rows[(i, 2 * i)] = {
            2 * i: zero,
            2 * i + 1: (1 - bi - an) / (1 - bi),
            2 * i + 2: an / (1 - bi),
        }
        if i == n - 1:
            # u_{2n} does not exist; its entry is a_n = 0
            for key in ((i, 2 * i - 2), (i, 2 * i - 1), (i, 2 * i)):
                if key in rows:
                    rows[key].pop(2 * i + 2)
    initial = {1: 1 - a[0], 2: a[0]}
    return TransitionTable(n, initial, rows)
