"""Horvitz-Thompson totals, Sen-Yates-Grundy variances and replicate summaries."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, ValidationError, ZeroJointProbability, ZeroTrueVariance
from .frame import DesignParams
from .jip import JointProbabilityMatrix

#: two-sided 95% normal quantile
Z_95 = 1.959964


def _units(sample, N: int) -> list[int]:
    units = list(getattr(sample, "selected", sample))
    for k in units:
        if not 1 <= k <= N:
            raise ValidationError(f"sampled unit {k} outside 1..{N}")
    return units


def horvitz_thompson(sample, y: Sequence, params: DesignParams):
    """``sum_{k in S} y_k / pi_k``.  Exact when ``params`` and ``y`` are rational."""
    if len(y) != params.N:
        raise DimensionMismatch(params.N, len(y), "y")
    units = _units(sample, params.N)
    if params.exact:
        return sum((y[k - 1] / params.probs[k - 1] for k in units), 0)
    return math.fsum(float(y[k - 1]) / params.probs[k - 1] for k in units)


def syg_variance(
    sample, y: Sequence, params: DesignParams, matrix: JointProbabilityMatrix | np.ndarray
):
    """Sen-Yates-Grundy variance estimate of the HT total.

    Raises :class:`ZeroJointProbability` if a sampled pair has ``pi_kl = 0``.
    """
    if len(y) != params.N:
        raise DimensionMismatch(params.N, len(y), "y")
    values = matrix.values if isinstance(matrix, JointProbabilityMatrix) else matrix
    if values.shape != (params.N, params.N):
        raise DimensionMismatch(params.N, values.shape[0], "joint matrix")
    units = _units(sample, params.N)
    pi = params.probs
    total = 0
    for a, k in enumerate(units):
        for l in units[a + 1:]:
            pkl = values[k - 1, l - 1]
            if pkl == 0:
                raise ZeroJointProbability(k, l)
            contrast = y[k - 1] / pi[k - 1] - y[l - 1] / pi[l - 1]
            total += (pi[k - 1] * pi[l - 1] - pkl) / pkl * contrast * contrast
    return total


def syg_variance_batch(
    membership: np.ndarray, y: np.ndarray, pi: np.ndarray, joint: np.ndarray
) -> np.ndarray:
    """SYG estimates for many samples at once (float).

    ``membership`` is ``(B, N)`` boolean, ``y`` is ``(N,)`` or ``(N, m)``;
    returns ``(B,)`` or ``(B, m)``.  Uses
    ``sum_{k<l} w_kl (e_k - e_l)^2 = e' D e - e' W e`` with ``D = diag(W 1)``.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        W = (np.outer(pi, pi) - joint) / joint
    np.fill_diagonal(W, 0.0)
    single = y.ndim == 1
    e = (y / pi) if single else (y / pi[:, None])
    if single:
        e = e[:, None]
    out = np.empty((membership.shape[0], e.shape[1]))
    for b, row in enumerate(membership):
        idx = np.flatnonzero(row)
        Wb = W[np.ix_(idx, idx)]
        if not np.all(np.isfinite(Wb)):
            bad = np.argwhere(~np.isfinite(Wb))[0]
            raise ZeroJointProbability(int(idx[bad[0]]) + 1, int(idx[bad[1]]) + 1)
        eb = e[idx]
        out[b] = np.einsum("i,ij->j", Wb.sum(axis=1), eb * eb) - np.einsum("ij,ik,kj->j", eb, Wb, eb)
    return out[:, 0] if single else out


def ht_variance(y: Sequence, params: DesignParams, matrix: JointProbabilityMatrix | np.ndarray):
    """True variance ``sum_kl (pi_kl - pi_k pi_l) (y_k/pi_k)(y_l/pi_l)``."""
    values = matrix.values if isinstance(matrix, JointProbabilityMatrix) else matrix
    if len(y) != params.N:
        raise DimensionMismatch(params.N, len(y), "y")
    if params.exact:
        pi = params.probs
        e = [y[k] / pi[k] for k in range(params.N)]
        return sum(
            ((values[k, l] - pi[k] * pi[l]) * e[k] * e[l] for k in range(params.N) for l in range(params.N)),
            0,
        )
    pi = np.asarray(params.probs, dtype=np.float64)
    e = np.asarray(y, dtype=np.float64) / pi
    delta = np.asarray(values, dtype=np.float64) - np.outer(pi, pi)
    return float(e @ delta @ e)


@dataclass(frozen=True)
class EstimateRecord:
    ht: float
    syg_var: float
    ci_low: float
    ci_high: float

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}


def estimate(sample, y, params: DesignParams, matrix, z: float = Z_95) -> EstimateRecord:
    """HT total, SYG variance and the normal-theory interval."""
    ht = float(horvitz_thompson(sample, y, params))
    var = float(syg_variance(sample, y, params, matrix))
    half = z * math.sqrt(max(var, 0.0))
    return EstimateRecord(ht, var, ht - half, ht + half)


@dataclass(frozen=True)
class McSummary:
    """Replicate summary; rates and relative errors in percent."""

    relative_bias: float
    rrmse: float
    error_low: float | None = None
    error_high: float | None = None
    error_total: float | None = None


def mc_summaries(
    var_estimates: Iterable[float],
    true_total: float,
    true_variance: float,
    ht_estimates: Iterable[float] | None = None,
    z: float = Z_95,
) -> McSummary:
    """Relative bias and RRMSE of variance estimates; CI error rates per tail.

    ``error_low`` counts intervals lying entirely below the true total,
    ``error_high`` those entirely above it (nominal 2.5% each).
    """
    v = np.asarray(list(var_estimates), dtype=np.float64)
    if v.size < 1:
        raise ValidationError("at least one replicate is required")
    if true_variance == 0:
        raise ZeroTrueVariance()
    rb = 100.0 * (v.mean() - true_variance) / true_variance
    rrmse = 100.0 * math.sqrt(np.mean((v - true_variance) ** 2)) / true_variance
    if ht_estimates is None:
        return McSummary(float(rb), float(rrmse))
    t = np.asarray(list(ht_estimates), dtype=np.float64)
    if t.size != v.size:
        raise DimensionMismatch(v.size, t.size, "HT estimates")
    half = z * np.sqrt(np.maximum(v, 0.0))
    low = 100.0 * np.mean(t + half < true_total)
    high = 100.0 * np.mean(t - half > true_total)
    return McSummary(float(rb), float(rrmse), float(low), float(high), float(low + high))
