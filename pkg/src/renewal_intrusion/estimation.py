"""Estimating process parameters.

* :func:`fit_from_history` pools interior intervals of past sequences that
  are assumed intrusion-free.
* :func:`em_fit` alternates between removing the MAP intrusion set and
  refitting on what remains.
* :func:`tune_p_epsilon` picks the intrusion prior that maximises
  entry-level AUC on labeled training data.
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import EstimationError, EvaluationError, ParameterError
from .inference import map_subsequence
from .intervals import Family, IntervalModel, fit_mle
from .model import MarkModel, build_factors, check_probability, fit_mark_model

__all__ = [
    "EmConfig",
    "EmResult",
    "Termination",
    "fit_from_history",
    "em_fit",
    "tune_p_epsilon",
    "default_p_grid",
]

MIN_FIT_INTERVALS = 2


def default_p_grid():
    """Ten log-spaced priors on ``[0.005, 0.5]``."""
    return np.geomspace(0.005, 0.5, 10).tolist()


def fit_from_history(family, sequences, fit_marks=False):
    """Pooled maximum-likelihood parameters from intrusion-free history.

    Only gaps between consecutive events are used; the gaps to the window
    bounds are censored and ignored.
    """
    sequences = list(sequences)
    intervals = [seq.interior_intervals() for seq in sequences]
    pooled = np.concatenate(intervals) if intervals else np.empty(0)
    if pooled.size == 0:
        raise EstimationError("no interior intervals: every sequence has fewer than two events")
    model = fit_mle(family, pooled)
    marks = None
    if fit_marks:
        if not all(seq.has_marks or seq.n == 0 for seq in sequences):
            raise EstimationError("mark fitting requested but some sequences carry no marks")
        marks = fit_mark_model(np.concatenate([seq.marks for seq in sequences if seq.n]))
    return model, marks


class Termination(str, enum.Enum):
    FIXED_POINT = "fixed_point"
    MAX_ITERATIONS = "max_iterations"
    K_MAX_EXCEEDED = "k_max_exceeded"


@dataclass(frozen=True)
class EmConfig:
    n_iter_max: int = 10
    k_max_fraction: float = 0.5
    family: Family = Family.GAMMA
    fit_marks: bool = False
    min_shape: Optional[float] = None  # Gamma shape floor; None keeps fits strict

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.min_shape is not None and not self.min_shape > 0.5:
            raise ParameterError(f"min_shape must exceed 0.5, got {self.min_shape}")
        if int(self.n_iter_max) != self.n_iter_max or self.n_iter_max < 1:
            raise ParameterError(f"n_iter_max must be a positive integer, got {self.n_iter_max}")
        if not 0.0 < self.k_max_fraction < 1.0:
            raise ParameterError(
                f"k_max_fraction must lie in (0, 1), got {self.k_max_fraction}"
            )

    def k_max(self, n):
        return int(math.floor(self.k_max_fraction * n))


@dataclass(frozen=True)
class EmResult:
    interval_model: IntervalModel
    mark_model: Optional[MarkModel]
    iterations: int
    termination: Termination
    final_map: frozenset
    map_sizes: tuple = field(default=())


def _m_step(seq, removed, cfg):
    kept = seq.without(removed)
    intervals = kept.interior_intervals()
    if intervals.size < MIN_FIT_INTERVALS:
        raise EstimationError(
            f"{intervals.size} interior intervals left after removing {len(removed)} events"
        )
    model = fit_mle(cfg.family, intervals, min_shape=cfg.min_shape)
    marks = fit_mark_model(kept.marks) if cfg.fit_marks else None
    return model, marks


def em_fit(seq, p_epsilon, cfg=None, initial_map=frozenset()):
    """Fit parameters to a single sequence by MAP-removal EM.

    Each round fits parameters on the events outside the previous MAP set,
    then recomputes the MAP set.  Stops at a fixed point, after
    ``cfg.n_iter_max`` fits, or once the MAP set exceeds ``K_max`` events.
    The parameters of the last successful fit are returned; a fit that
    fails mid-loop (too few events left) ends the loop like ``K_max``.
    """
    cfg = cfg or EmConfig()
    p = check_probability(p_epsilon)
    if seq.n < 3:
        raise EstimationError(f"EM needs at least 3 events, got {seq.n}")
    if cfg.fit_marks and not seq.has_marks:
        raise EstimationError("mark fitting requested but the sequence carries no marks")
    k_max = cfg.k_max(seq.n)
    previous = frozenset(initial_map)
    sizes = []

    model, marks = _m_step(seq, previous, cfg)
    iteration = 1
    while True:
        if iteration == cfg.n_iter_max:
            termination, final = Termination.MAX_ITERATIONS, previous
            break
        current = map_subsequence(build_factors(seq, model, p, marks)).intrusion_indices
        sizes.append(len(current))
        if current == previous:
            termination, final = Termination.FIXED_POINT, current
            break
        if len(current) > k_max:
            termination, final = Termination.K_MAX_EXCEEDED, current
            break
        try:
            next_model, next_marks = _m_step(seq, current, cfg)
        except EstimationError:
            termination, final = Termination.K_MAX_EXCEEDED, current
            break
        model, marks = next_model, next_marks
        previous = current
        iteration += 1
    return EmResult(model, marks, iteration, termination, final, tuple(sizes))


def tune_p_epsilon(train, candidates=None, family=Family.GAMMA, use_marks=False, scorer=None):
    """Candidate prior with the highest training AUC (ties go to the smaller one).

    Each training entry is scored with per-entry EM parameters fitted under
    the candidate prior.  ``scorer`` may supply a complete
    :class:`~.evalkit.ScorerConfig` template whose ``p_epsilon`` is replaced
    per candidate; otherwise an EM scorer is built from ``family`` and
    ``use_marks``.
    """
    from .evalkit import ScorerConfig, entry_labels, auc, score_dataset

    candidates = default_p_grid() if candidates is None else list(candidates)
    if not candidates:
        raise ParameterError("no candidate priors given")
    train = list(train)
    labels = entry_labels(train)
    if labels.all() or not labels.any():
        raise EvaluationError("training data must contain both positive and negative entries")
    if scorer is None:
        scorer = ScorerConfig(
            p_epsilon=candidates[0],
            mode="combined" if use_marks else "intervals",
            em=True,
            family=family,
        )
    best_p, best_auc = None, -np.inf
    for p in sorted(candidates):
        results = score_dataset(train, scorer.with_p(p))
        value = auc([r.intrusion_probability for r in results], labels)
        if value > best_auc:
            best_p, best_auc = p, value
    return best_p
