"""Scoring labeled datasets and summarising detection quality."""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import rankdata

from .estimation import EmConfig, em_fit
from .exceptions import EvaluationError, IntrusionError, ParameterError
from .inference import infer_all
from .intervals import Family, IntervalModel, fit_mle
from .model import MarkModel, check_probability

__all__ = [
    "MODES",
    "ScorerConfig",
    "EvalReport",
    "auc",
    "roc_curve",
    "jaccard",
    "entry_labels",
    "score_entry",
    "score_dataset",
    "evaluate_dataset",
]

MODES = ("intervals", "marks", "combined")


def _check_two_classes(labels):
    labels = np.asarray(labels, dtype=bool)
    if labels.all() or not labels.any():
        raise EvaluationError("AUC is undefined unless both classes are present")
    return labels


def auc(scores, labels):
    """Area under the ROC curve as a Mann-Whitney statistic with midranks."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise EvaluationError("scores and labels must have equal length")
    labels = _check_two_classes(labels)
    ranks = rankdata(scores)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve(scores, labels):
    """``(threshold, fpr, tpr)`` at every distinct score, from ``(inf, 0, 0)`` down to ``(1, 1)``."""
    scores = np.asarray(scores, dtype=float)
    labels = _check_two_classes(labels)
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    tp = np.cumsum(y)
    fp = np.cumsum(~y)
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    n_pos, n_neg = tp[-1], fp[-1]
    points = [(float("inf"), 0.0, 0.0)]
    points += [
        (float(s[i]), float(fp[i] / n_neg), float(tp[i] / n_pos)) for i in last
    ]
    return points


def jaccard(predicted, truth):
    """``|A & B| / |A | B|``; two empty sets score 1."""
    a, b = set(predicted), set(truth)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def entry_labels(data):
    """True for entries that contain at least one intrusion-labeled event."""
    labels = []
    for i, seq in enumerate(data):
        if seq.labels is None and seq.n:
            raise EvaluationError(f"entry {i} ({seq.entry_id}) is unlabeled")
        labels.append(seq.is_positive)
    return np.array(labels, dtype=bool)


@dataclass(frozen=True)
class ScorerConfig:
    """How entries are scored.

    ``mode`` selects what the posterior looks at: ``"intervals"`` ignores
    marks, ``"combined"`` uses intervals and marks, and ``"marks"`` is a
    baseline that scores marks under an Exponential interval model (which
    makes interval lengths irrelevant to the posterior).  With ``em=True``
    parameters are fitted per entry; otherwise ``interval_model`` and, when
    marks are used, ``mark_model`` must be supplied.
    """

    p_epsilon: float
    mode: str = "intervals"
    em: bool = False
    family: Family = Family.GAMMA
    interval_model: Optional[IntervalModel] = None
    mark_model: Optional[MarkModel] = None
    n_iter_max: int = 10
    k_max_fraction: float = 0.5
    min_shape: Optional[float] = None

    def __post_init__(self):
        check_probability(self.p_epsilon)
        object.__setattr__(self, "family", Family.parse(self.family))
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.em:
            self.em_config()  # validates the EM settings up front
        else:
            if self.mode != "marks" and self.interval_model is None:
                raise ParameterError("known-parameter scoring needs an interval_model (or em=True)")
            if self.uses_marks and self.mark_model is None:
                raise ParameterError("known-parameter mark scoring needs a mark_model (or em=True)")

    @property
    def uses_marks(self):
        return self.mode in ("marks", "combined")

    def with_p(self, p_epsilon):
        return replace(self, p_epsilon=p_epsilon)

    def em_config(self):
        family = Family.EXPONENTIAL if self.mode == "marks" else self.family
        return EmConfig(
            self.n_iter_max, self.k_max_fraction, family, self.uses_marks, self.min_shape
        )


def _known_parameters(seq, scorer):
    marks = scorer.mark_model if scorer.uses_marks else None
    if scorer.mode != "marks":
        return scorer.interval_model, marks
    # any exponential rate yields the same posterior; keep the scale sensible
    if scorer.interval_model is not None:
        return IntervalModel.exponential(1.0 / scorer.interval_model.mean), marks
    gaps = seq.interior_intervals()
    gaps = gaps[gaps > 0]
    if gaps.size:
        return fit_mle(Family.EXPONENTIAL, gaps), marks
    return IntervalModel.exponential(max(seq.n, 1) / seq.duration), marks


def score_entry(seq, scorer):
    """Posterior summary (with MAP set) of one entry."""
    if scorer.em:
        fitted = em_fit(seq, scorer.p_epsilon, scorer.em_config())
        model, marks = fitted.interval_model, fitted.mark_model
    else:
        model, marks = _known_parameters(seq, scorer)
    return infer_all(seq, model, scorer.p_epsilon, marks, compute_map=True)


def score_dataset(data, scorer):
    results = []
    for i, seq in enumerate(data):
        try:
            results.append(score_entry(seq, scorer))
        except IntrusionError as exc:
            raise type(exc)(f"entry {i} ({seq.entry_id}): {exc}") from exc
    return results


@dataclass(frozen=True)
class EvalReport:
    entry_auc: float
    event_auc: float
    mean_jaccard: float
    mean_jaccard_positive: float
    mean_posterior_positive: float
    mean_posterior_negative: float
    roc_entry: List[Tuple[float, float, float]] = field(repr=False)
    roc_event: List[Tuple[float, float, float]] = field(repr=False)
    n_entries: int
    p_epsilon: Optional[float] = None
    mode: Optional[str] = None

    def to_dict(self, with_roc=False):
        out = {
            "n_entries": self.n_entries,
            "p_epsilon": self.p_epsilon,
            "mode": self.mode,
            "entry_auc": self.entry_auc,
            "event_auc": self.event_auc,
            "mean_jaccard": self.mean_jaccard,
            "mean_jaccard_positive": self.mean_jaccard_positive,
            "mean_posterior_positive": self.mean_posterior_positive,
            "mean_posterior_negative": self.mean_posterior_negative,
        }
        if with_roc:
            out["roc_entry"] = self.roc_entry
            out["roc_event"] = self.roc_event
        return out


def evaluate_dataset(data, scorer, results=None):
    """Score a labeled dataset and aggregate detection metrics.

    Event-level AUC pools event marginals over all entries.  Jaccard scores
    compare each entry's MAP set with its true intrusion set; the overall
    mean includes negative entries, where an empty MAP set scores 1.
    """
    data = list(data)
    labels = _check_two_classes(entry_labels(data))
    if results is None:
        results = score_dataset(data, scorer)
    scores = np.array([r.intrusion_probability for r in results])

    event_scores = np.concatenate([r.event_marginals for r in results])
    event_labels = np.concatenate(
        [seq.labels if seq.labels is not None else np.zeros(0, bool) for seq in data]
    )
    jac = np.array([jaccard(r.map.intrusion_indices, seq.intrusion_indices)
                    for r, seq in zip(results, data)])
    return EvalReport(
        entry_auc=auc(scores, labels),
        event_auc=auc(event_scores, event_labels),
        mean_jaccard=float(jac.mean()),
        mean_jaccard_positive=float(jac[labels].mean()),
        mean_posterior_positive=float(scores[labels].mean()),
        mean_posterior_negative=float(scores[~labels].mean()),
        roc_entry=roc_curve(scores, labels),
        roc_event=roc_curve(event_scores, event_labels),
        n_entries=len(data),
        p_epsilon=scorer.p_epsilon if scorer is not None else None,
        mode=scorer.mode if scorer is not None else None,
    )
