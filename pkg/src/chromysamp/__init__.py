"""Chromy sequential sampling, its randomized variant, exact joint inclusion
probabilities and design-based variance estimation."""

from .chromy import (
    ChromyStream,
    Sample,
    chromy_sample,
    chromy_stream,
    randomized_chromy_batch,
    randomized_chromy_sample,
)
from .clusters import ClusteredPopulation, TransitionTable, build_clustered, transition_table, two_stage_sample
from .errors import CorruptionError, ValidationError
from .estimators import EstimateRecord, McSummary, estimate, horvitz_thompson, ht_variance, mc_summaries, syg_variance
from .frame import DesignParams, Frame, build_frame, validate_params
from .jip import JointProbabilityMatrix, chromy_matrix, monte_carlo_matrix, randomized_matrix, second_order_chromy
from .oracle import DesignDistribution, design_moments, enumerate_design
from .pivotal import pivotal_sample
from .simulation import ExperimentConfig, PopulationSpec, generate_population, pips_probabilities, run_experiment

__version__ = "0.1.0"

__all__ = [
    "ChromyStream", "ClusteredPopulation", "CorruptionError", "DesignDistribution", "DesignParams",
    "EstimateRecord", "ExperimentConfig", "Frame", "JointProbabilityMatrix", "McSummary",
    "PopulationSpec", "Sample", "TransitionTable", "ValidationError", "build_clustered", "build_frame",
    "chromy_matrix", "chromy_sample", "chromy_stream", "design_moments", "enumerate_design", "estimate",
    "generate_population", "horvitz_thompson", "ht_variance", "mc_summaries", "monte_carlo_matrix",
    "pips_probabilities", "pivotal_sample", "randomized_chromy_batch", "randomized_chromy_sample",
    "randomized_matrix", "run_experiment", "second_order_chromy", "syg_variance", "transition_table",
    "two_stage_sample", "validate_params",
]
