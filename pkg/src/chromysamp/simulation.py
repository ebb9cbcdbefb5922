"""Simulation study: synthetic populations, pi-ps probabilities, replicate runs.

Seeding rule: the master seed feeds ``numpy.random.SeedSequence``; its first
spawned child generates the population and child ``1 + j`` drives the
replicates for the ``j``-th sample size.  Identical config and seed give
identical output.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .chromy import randomized_chromy_batch
from .errors import DegenerateX, InfeasibleSize, ValidationError
from .estimators import Z_95, ht_variance, mc_summaries, syg_variance_batch
from .frame import DesignParams, validate_params
from .jip import JointProbabilityMatrix, monte_carlo_matrix, randomized_matrix

log = logging.getLogger(__name__)

VARIABLES = ("linear", "quadratic", "exponential", "bump")


@dataclass(frozen=True)
class Coefficients:
    """Model constants; none of them are published, these are tuned defaults."""

    linear: tuple = (10.0, 2.0, 2.5)  # a10, a11, sigma1
    quadratic: tuple = (8.0, 2.0, 3.0)  # a20, a21, sigma2
    exponential: tuple = (2.3, 0.2, 3.0)  # a30, a31, sigma3
    bump: tuple = (9.0, 2.0, 4.0, 1.0, 4.0)  # a40, a41, a42, a43, sigma4


@dataclass(frozen=True)
class PopulationSpec:
    N: int = 500
    x_law: str = "gamma"
    x_params: tuple = (2.0, 2.0)
    rescale: tuple = (1.0, 10.0)
    coefficients: Coefficients = field(default_factory=Coefficients)
    seed: int | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "PopulationSpec":
        d = dict(d)
        if "preset" in d:
            base = PRESETS[d.pop("preset")]
        else:
            base = cls()
        coef = d.pop("coefficients", None)
        if coef is not None:
            d["coefficients"] = Coefficients(**{k: tuple(v) for k, v in coef.items()})
        for key in ("x_params", "rescale"):
            if key in d:
                d[key] = tuple(d[key])
        return replace(base, **d)


PRESETS = {
    "population1": PopulationSpec(x_law="gamma", x_params=(2.0, 2.0)),
    "population2": PopulationSpec(
        x_law="lognormal",
        x_params=(0.0, 1.7),
        coefficients=Coefficients(
            linear=(10.0, 2.0, 2.0),
            quadratic=(8.0, 1.0, 2.5),
            exponential=(2.3, 0.15, 2.0),
            bump=(4.0, 1.5, 2.0, 1.0, 4.0),
        ),
    ),
}


@dataclass(frozen=True)
class Population:
    x: np.ndarray
    y: np.ndarray  # (N, 4), columns in VARIABLES order
    mu_y: tuple
    S2_y: tuple


def rescale(x: np.ndarray, lo: float = 1.0, hi: float = 10.0) -> np.ndarray:
    """Affine map sending ``min(x)`` to ``lo`` and ``max(x)`` to ``hi``."""
    span = x.max() - x.min()
    if span == 0:
        raise DegenerateX()
    out = lo + (hi - lo) * (x - x.min()) / span
    out[np.argmin(x)] = lo
    out[np.argmax(x)] = hi
    return out


def model_values(x: np.ndarray, eps: np.ndarray, coef: Coefficients) -> np.ndarray:
    d = x - x.mean()
    a10, a11, s1 = coef.linear
    a20, a21, s2 = coef.quadratic
    a30, a31, s3 = coef.exponential
    a40, a41, a42, a43, s4 = coef.bump
    return np.column_stack(
        [
            a10 + a11 * d + s1 * eps,
            a20 + a21 * d**2 + s2 * eps,
            np.exp(a30 + a31 * d) + s3 * eps,
            a40 + a41 * d**2 - a42 * np.exp(-a43 * d**2) + s4 * eps,
        ]
    )


def generate_population(spec: PopulationSpec, rng=None) -> Population:
    """Draw ``x`` from the size law, rescale it, then the four study variables.

    One standard-normal ``eps_k`` per unit is shared by the four models.
    """
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if spec.x_law == "gamma":
        shape, scale = spec.x_params
        raw = gen.gamma(shape, scale, spec.N)
    elif spec.x_law == "lognormal":
        mu, sigma = spec.x_params
        raw = gen.lognormal(mu, sigma, spec.N)
    else:
        raise ValidationError(f"unknown size law {spec.x_law!r}")
    x = rescale(raw, *spec.rescale)
    eps = gen.standard_normal(spec.N)
    y = model_values(x, eps, spec.coefficients)
    return Population(
        x, y, tuple(float(v) for v in y.mean(axis=0)), tuple(float(v) for v in y.var(axis=0, ddof=1))
    )


@dataclass(frozen=True)
class PipsResult:
    params: DesignParams | None  # over the non-certainty units, in population order
    certainty: tuple  # 1-based labels taken with certainty
    sampled: tuple  # 1-based labels of the units in ``params``


def pips_probabilities(x: Sequence[float], n: int) -> PipsResult:
    """Probabilities proportional to ``x``; units reaching 1 are taken with certainty.

    Certainty units are removed, ``n`` is reduced accordingly and the rest are
    recomputed until every probability is below 1.
    """
    x = np.asarray(x, dtype=np.float64)
    N = x.size
    if n > N:
        raise InfeasibleSize(n, N)
    if np.any(x <= 0):
        raise ValidationError("size values must be positive")
    active = np.arange(N)
    certain: list[int] = []
    remaining = n
    for _ in range(N + 1):
        if remaining == 0:
            break
        pi = remaining * x[active] / math.fsum(x[active])
        hit = pi >= 1.0
        if not np.any(hit):
            params = validate_params(pi.tolist(), "float")
            return PipsResult(params, tuple(sorted(certain)), tuple(int(k) + 1 for k in active))
        certain.extend(int(k) + 1 for k in active[hit])
        remaining -= int(hit.sum())
        active = active[~hit]
    return PipsResult(None, tuple(sorted(certain)), tuple(int(k) + 1 for k in active))


@dataclass(frozen=True)
class ExperimentConfig:
    population: PopulationSpec = field(default_factory=PopulationSpec)
    sample_sizes: tuple = (50, 100, 200)
    replicates: int = 1000
    seed: int = 1
    z: float = Z_95
    exact_max_N: int = 600
    mc_draws: int = 1_000_000
    label: str = "population"

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ValidationError("replicates must be at least 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "population" in d:
            pop = d["population"]
            d["population"] = PopulationSpec.from_dict(pop if isinstance(pop, dict) else {"preset": pop})
        if "sample_sizes" in d:
            d["sample_sizes"] = tuple(int(v) for v in d["sample_sizes"])
        return cls(**d)


@dataclass(frozen=True)
class ResultRow:
    label: str
    variable: str
    n: int
    relative_bias: float | None
    rrmse: float | None
    error_low: float
    error_high: float
    error_total: float
    true_variance: float
    certainty_units: int
    min_pi: float
    max_pi: float
    matrix: str
    excluded: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def _joint_matrix(params: DesignParams, cfg: ExperimentConfig, gen) -> JointProbabilityMatrix:
    if params.N <= cfg.exact_max_N:
        return randomized_matrix(params)
    log.warning(
        "N=%d exceeds exact_max_N=%d; using a %d-draw Monte-Carlo matrix",
        params.N, cfg.exact_max_N, cfg.mc_draws,
    )
    return monte_carlo_matrix(params, cfg.mc_draws, gen)


def run_experiment(config: ExperimentConfig, seed: int | None = None) -> list[ResultRow]:
    """Run ``config.replicates`` randomized Chromy draws for every sample size."""
    seed = config.seed if seed is None else seed
    children = np.random.SeedSequence(seed).spawn(1 + len(config.sample_sizes))
    pop = generate_population(config.population, np.random.default_rng(children[0]))
    totals = pop.y.sum(axis=0)
    rows: list[ResultRow] = []
    for j, n in enumerate(config.sample_sizes):
        gen = np.random.default_rng(children[1 + j])
        pips = pips_probabilities(pop.x, n)
        cert = np.asarray(pips.certainty, dtype=np.int64) - 1
        cert_total = pop.y[cert].sum(axis=0)
        if pips.params is None:
            raise ValidationError(f"n={n} takes every unit with certainty")
        idx = np.asarray(pips.sampled, dtype=np.int64) - 1
        params = pips.params
        pi = np.asarray(params.probs)
        joint = _joint_matrix(params, config, gen)
        Y = pop.y[idx]
        member, _ = randomized_chromy_batch(params, config.replicates, gen)
        ht = cert_total + member.astype(np.float64) @ (Y / pi[:, None])
        var_hat = syg_variance_batch(member, Y, pi, joint.as_float())
        for m, name in enumerate(VARIABLES):
            true_var = ht_variance(Y[:, m], params, joint.as_float())
            scale = float(np.sum((Y[:, m] / pi) ** 2))
            excluded = abs(true_var) <= 1e-12 * max(scale, 1.0)
            if excluded:
                # relative measures are undefined for a zero-variance variable
                rb = rrmse = None
                errors = (math.nan, math.nan, math.nan)
            else:
                summ = mc_summaries(var_hat[:, m], totals[m], true_var, ht[:, m], config.z)
                rb, rrmse = summ.relative_bias, summ.rrmse
                errors = (summ.error_low, summ.error_high, summ.error_total)
            rows.append(
                ResultRow(
                    config.label, name, n, rb, rrmse, *errors,
                    float(true_var), len(pips.certainty),
                    float(pi.min()), float(pi.max()), joint.provenance, excluded,
                )
            )
    return rows
