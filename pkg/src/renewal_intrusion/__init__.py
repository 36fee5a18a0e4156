"""Detecting intrusions in renewal-process event sequences.

Events of a legitimate process arrive with i.i.d. intervals; an intrusion
is a set of extra events superimposed on it.  The package computes exact
posteriors over intrusion sets in quadratic time, the most probable set,
per-sequence EM estimates, synthetic benchmarks and evaluation metrics.
"""

from .estimation import EmConfig, EmResult, Termination, em_fit, fit_from_history, tune_p_epsilon
from .estimator import IntrusionDetector, check_sequences
from .evalkit import EvalReport, ScorerConfig, auc, evaluate_dataset, jaccard, roc_curve
from .exceptions import (
    DomainError,
    EstimationError,
    EvaluationError,
    FormatError,
    IntrusionError,
    NumericError,
    ParameterError,
)
from .inference import brute_force_posterior, infer_all, log_marginal_likelihood, map_subsequence
from .intervals import Family, IntervalModel, fit_mle
from .model import Event, EventSequence, MarkModel, build_factors, log_prob_subsequence
from .synth import GenSpec, gen_dataset, gen_entry

__version__ = "0.1.0"

__all__ = [
    "DomainError", "EstimationError", "EvaluationError", "FormatError", "IntrusionError",
    "NumericError", "ParameterError",
    "Family", "IntervalModel", "fit_mle",
    "Event", "EventSequence", "MarkModel", "build_factors", "log_prob_subsequence",
    "infer_all", "log_marginal_likelihood", "map_subsequence", "brute_force_posterior",
    "EmConfig", "EmResult", "Termination", "em_fit", "fit_from_history", "tune_p_epsilon",
    "GenSpec", "gen_dataset", "gen_entry",
    "ScorerConfig", "EvalReport", "auc", "roc_curve", "jaccard", "evaluate_dataset",
    "IntrusionDetector", "check_sequences",
]
