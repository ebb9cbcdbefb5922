"""Second-order inclusion probabilities.

Closed form for Chromy sampling, the mixture over circular starts for the
randomized variant (``O(N^3)`` overall), and a Monte-Carlo fallback.
Matrices are dense ``N x N`` arrays indexed from 0 (unit ``k`` is row
``k - 1``); exact matrices use an object array of Fractions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .chromy import as_generator, randomized_chromy_batch, rotation_profiles
from .frame import DesignParams, Frame, build_frame

CLOSED_FORM = "closed-form"
PERMUTATION_AVERAGED = "permutation-averaged"
MONTE_CARLO = "monte-carlo"


@dataclass(frozen=True)
class JointProbabilityMatrix:
    values: np.ndarray
    provenance: str
    draws: int | None = None

    @property
    def N(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, kl: tuple[int, int]):
        """Entry for 1-based unit labels ``(k, l)``."""
        k, l = kl
        return self.values[k - 1, l - 1]

    def as_float(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def provenance_record(self) -> dict:
        rec = {"provenance": self.provenance, "N": self.N}
        if self.draws is not None:
            rec["draws"] = self.draws
        return rec


def _c_factor(frame: Frame, m: int):
    """``c_m = a_m b_m / ((1 - a_m)(1 - b_m))`` for cross-border index ``m``."""
    a, b = frame.a[m - 1], frame.b[m - 1]
    return a * b / ((1 - a) * (1 - b))


def _c_range(frame: Frame, i: int, j: int):
    out = Fraction(1) if frame.params.exact else 1.0
    for m in range(i, j):
        out *= _c_factor(frame, m)
    return out


def second_order_chromy(frame: Frame, k: int, l: int):
    """Joint inclusion probability of units ``k != l`` under Chromy sampling."""
    if k == l:
        raise ValueError("k and l must be distinct")
    if k > l:
        k, l = l, k
    pk, pl = frame.probs[k - 1], frame.probs[l - 1]
    rk, rl = frame.cross_border_rank(k), frame.cross_border_rank(l)
    if rk is None and rl is None:
        i, j = frame.microstratum_of(k), frame.microstratum_of(l)
        if i == j:
            return pk * 0
        return pk * pl * (1 - _c_range(frame, i, j))
    if rl is None:
        # k = k_{i-1} opens microstratum i; l is interior to U_j, i <= j
        i, j = rk + 1, frame.microstratum_of(l)
        b = frame.b[rk - 1]
        factor = b * (1 - pk) / (pk * (1 - b))
        return pk * pl * (1 - factor * _c_range(frame, i, j))
    if rk is None:
        # l = k_{j-1} closes microstratum j - 1; k is interior to U_i, i < j
        i, j = frame.microstratum_of(k), rl + 1
        b = frame.b[rl - 1]
        factor = (1 - pl) * (1 - b) / (pl * b)
        return pk * pl * (1 - factor * _c_range(frame, i, j))
    # both cross-border: k = k_{i-1}, l = k_{j-1}
    i, j = rk + 1, rl + 1
    bi, bj = frame.b[rk - 1], frame.b[rl - 1]
    factor = bi * (1 - bj) * (1 - pk) * (1 - pl) / (pk * pl * bj * (1 - bi))
    return pk * pl * (1 - factor * _c_range(frame, i, j))


def _unit_factors(frame: Frame):
    """Per-unit microstratum indices and correction factors, float arrays.

    As the earlier unit of a pair, unit ``k`` contributes row index ``r_k``
    and factor ``A_k``; as the later one, column index ``s_l`` and factor
    ``B_l``.  Then ``pi_kl = pi_k pi_l (1 - A_k B_l c(r_k, s_l))`` for
    ``k < l``.
    """
    N, n = frame.N, frame.n
    pi = np.asarray(frame.probs, dtype=np.float64)
    cb = np.asarray(frame.cross_border, dtype=np.int64)
    b = np.asarray(frame.b, dtype=np.float64)
    units = np.arange(1, N + 1)
    # microstratum of a non-cross-border unit = 1 + number of cross-borders before it
    stratum = 1 + np.searchsorted(cb, units, side="left")
    r = stratum.copy()
    s = stratum.copy()
    A = np.ones(N)
    B = np.ones(N)
    if cb.size:
        idx = cb - 1
        p = pi[idx]
        r[idx] = np.arange(2, n + 1)
        s[idx] = np.arange(2, n + 1)
        A[idx] = b * (1 - p) / (p * (1 - b))
        B[idx] = (1 - p) * (1 - b) / (p * b)
    return pi, r - 1, s - 1, A, B


def _c_matrix(frame: Frame) -> np.ndarray:
    """``C[i, j] = prod_{m=i}^{j-1} c_m`` over microstrata, 0-based, ``i <= j``."""
    n = frame.n
    a = np.asarray(frame.a, dtype=np.float64)
    b = np.asarray(frame.b, dtype=np.float64)
    c = a * b / ((1 - a) * (1 - b))
    C = np.zeros((n, n))
    for i in range(n):
        C[i, i:] = np.cumprod(np.concatenate(([1.0], c[i:])))[: n - i]
    return C


def _float_chromy_matrix(frame: Frame) -> np.ndarray:
    pi, r, s, A, B = _unit_factors(frame)
    C = _c_matrix(frame)
    M = np.outer(pi, pi) * (1.0 - np.outer(A, B) * C[np.ix_(r, s)])
    M = np.triu(M, 1)
    M = M + M.T
    np.fill_diagonal(M, pi)
    return M


def _exact_chromy_matrix(frame: Frame) -> np.ndarray:
    N = frame.N
    M = np.empty((N, N), dtype=object)
    for k in range(1, N + 1):
        M[k - 1, k - 1] = frame.probs[k - 1]
        for l in range(k + 1, N + 1):
            M[k - 1, l - 1] = M[l - 1, k - 1] = second_order_chromy(frame, k, l)
    return M


def chromy_matrix(frame: Frame) -> JointProbabilityMatrix:
    """All joint inclusion probabilities of (non-randomized) Chromy sampling."""
    if frame.params.exact:
        return JointProbabilityMatrix(_exact_chromy_matrix(frame), CLOSED_FORM)
    return JointProbabilityMatrix(_float_chromy_matrix(frame), CLOSED_FORM)


def _rotation_contribution(params: DesignParams, starts) -> np.ndarray:
    N = params.N
    exact = params.exact
    acc = np.full((N, N), Fraction(0), dtype=object) if exact else np.zeros((N, N))
    for start in starts:
        frame = build_frame(params.permuted(start))
        M = _exact_chromy_matrix(frame) if exact else _float_chromy_matrix(frame)
        weight = params.probs[start - 1] / params.n
        order = (np.arange(N) + start - 1) % N
        acc[np.ix_(order, order)] += weight * M
    return acc


def randomized_matrix(params: DesignParams, workers: int | None = None) -> JointProbabilityMatrix:
    """Joint inclusion probabilities of randomized Chromy sampling.

    Averages the closed form over the ``N`` circular starts with weights
    ``pi_s / n``.  Starts are split into contiguous blocks that may run on
    ``workers`` threads; blocks are summed in start order, so the result does
    not depend on the worker count.
    """
    N = params.N
    workers = workers or 1
    blocks = [range(lo, min(lo + 64, N + 1)) for lo in range(1, N + 1, 64)]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda blk: _rotation_contribution(params, blk), blocks))
    else:
        parts = [_rotation_contribution(params, blk) for blk in blocks]
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return JointProbabilityMatrix(total, PERMUTATION_AVERAGED)


def monte_carlo_matrix(
    params: DesignParams,
    draws: int,
    rng=None,
    shard_size: int = 100_000,
    workers: int | None = None,
) -> JointProbabilityMatrix:
    """Empirical pair frequencies over ``draws`` randomized Chromy samples.

    Shard ``j`` (``shard_size`` draws each, the last one shorter) uses the
    ``j``-th child of ``rng.spawn``; the result depends only on the seed,
    not on ``workers``.
    """
    if draws < 1:
        raise ValueError("draws must be at least 1")
    gen, _ = as_generator(rng)
    N = params.N
    n_shards = math.ceil(draws / shard_size)
    children = gen.spawn(n_shards)
    profiles = rotation_profiles(params)
    sizes = [min(shard_size, draws - j * shard_size) for j in range(n_shards)]

    def run(j: int) -> np.ndarray:
        member, _ = randomized_chromy_batch(params, sizes[j], children[j], profiles)
        X = member.astype(np.float64)
        return X.T @ X

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            counts = list(pool.map(run, range(n_shards)))
    else:
        counts = [run(j) for j in range(n_shards)]
    total = np.zeros((N, N))
    for c in counts:
        total += c
    return JointProbabilityMatrix(total / draws, MONTE_CARLO, draws)
