"""scikit-learn style detector over collections of event sequences.

Samples are whole entries, not feature rows, so ``X`` is a sequence of
:class:`~renewal_intrusion.model.EventSequence` objects (or anything
:func:`check_sequences` can convert).
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .dataio import record_to_sequence
from .estimation import fit_from_history
from .evalkit import MODES, ScorerConfig, auc, score_dataset
from .exceptions import DomainError, ParameterError
from .intervals import Family
from .model import EventSequence, check_probability

__all__ = ["IntrusionDetector", "check_sequences"]


def _as_sequence(item, index):
    if isinstance(item, EventSequence):
        return item
    if isinstance(item, dict):
        return record_to_sequence(item, default_id=str(index))
    if isinstance(item, (tuple, list)) and 3 <= len(item) <= 4:
        return EventSequence(*item, entry_id=str(index))
    raise DomainError(
        f"sample {index}: expected an EventSequence, a record dict or a "
        f"(t_start, t_end, times[, marks]) tuple, got {type(item).__name__}"
    )


def check_sequences(X, require_marks=False, min_count=1):
    """Validate and convert ``X`` into a list of :class:`EventSequence`."""
    if isinstance(X, (EventSequence, dict)):
        raise DomainError("X must be a collection of sequences, not a single sequence")
    seqs = [_as_sequence(item, i) for i, item in enumerate(X)]
    if len(seqs) < min_count:
        raise DomainError(f"need at least {min_count} sequence(s), got {len(seqs)}")
    if require_marks:
        for i, seq in enumerate(seqs):
            if seq.n and not seq.has_marks:
                raise DomainError(f"sample {i}: marks are required but missing")
    return seqs


def _check_targets(y, n):
    y = np.asarray(y).ravel()
    if y.shape[0] != n:
        raise DomainError(f"y has {y.shape[0]} labels for {n} sequences")
    if not np.isin(y, (0, 1)).all():
        raise DomainError("y must contain only 0/1 or booleans")
    return y.astype(bool)


class IntrusionDetector(ClassifierMixin, BaseEstimator):
    """Flags entries that contain events foreign to a renewal process.

    Parameters
    ----------
    p_epsilon : float
        Prior probability that any single event is an intrusion.
    family : {"gamma", "exponential"}
        Interval distribution family.
    mode : {"intervals", "combined", "marks"}
        What the posterior looks at; see :class:`~.evalkit.ScorerConfig`.
    em : bool
        Fit parameters per entry at prediction time instead of learning
        them in :meth:`fit`.
    n_iter_max, k_max_fraction, min_shape
        EM settings, used only when ``em`` is true.
    threshold : float
        Posterior intrusion probability above which :meth:`predict` says 1.
    """

    def __init__(self, p_epsilon=0.1, family="gamma", mode="intervals", em=False,
                 n_iter_max=10, k_max_fraction=0.5, min_shape=None, threshold=0.5):
        self.p_epsilon = p_epsilon
        self.family = family
        self.mode = mode
        self.em = em
        self.n_iter_max = n_iter_max
        self.k_max_fraction = k_max_fraction
        self.min_shape = min_shape
        self.threshold = threshold

    def _validate_params(self):
        check_probability(self.p_epsilon)
        Family.parse(self.family)
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ParameterError(f"threshold must lie in [0, 1], got {self.threshold}")

    def fit(self, X, y=None):
        """Learn process parameters from intrusion-free sequences.

        With ``y`` given, only sequences labeled 0 are used.  With
        ``em=True`` nothing is learned here beyond validating settings.
        """
        self._validate_params()
        uses_marks = self.mode != "intervals"
        seqs = check_sequences(X, require_marks=uses_marks)
        if y is not None:
            y = _check_targets(y, len(seqs))
            self.classes_ = np.array([0, 1])
            seqs = [s for s, positive in zip(seqs, y) if not positive]
            if not seqs:
                raise DomainError("no negative (y == 0) sequences to learn from")
        interval_model = mark_model = None
        if not self.em:
            family = Family.EXPONENTIAL if self.mode == "marks" else Family.parse(self.family)
            interval_model, mark_model = fit_from_history(family, seqs, fit_marks=uses_marks)
        self.interval_model_ = interval_model
        self.mark_model_ = mark_model
        self.scorer_ = ScorerConfig(
            p_epsilon=self.p_epsilon,
            mode=self.mode,
            em=self.em,
            family=self.family,
            interval_model=interval_model,
            mark_model=mark_model,
            n_iter_max=self.n_iter_max,
            k_max_fraction=self.k_max_fraction,
            min_shape=self.min_shape,
        )
        if not hasattr(self, "classes_"):
            self.classes_ = np.array([0, 1])
        return self

    def _infer(self, X):
        check_is_fitted(self, "scorer_")
        seqs = check_sequences(X, require_marks=self.scorer_.uses_marks)
        return score_dataset([s.without_labels() for s in seqs], self.scorer_)

    def decision_function(self, X):
        """Posterior probability that each entry contains an intrusion."""
        return np.array([r.intrusion_probability for r in self._infer(X)])

    def predict_proba(self, X):
        p = self.decision_function(X)
        return np.column_stack((1.0 - p, p))

    def predict(self, X):
        return (self.decision_function(X) > self.threshold).astype(int)

    def score(self, X, y, sample_weight=None):
        """Entry-level ROC AUC (not accuracy)."""
        if sample_weight is not None:
            raise ParameterError("sample weights are not supported")
        seqs = check_sequences(X)
        y = _check_targets(y, len(seqs))
        return auc(self.decision_function(seqs), y)

    def event_marginals(self, X):
        """Per-event intrusion probabilities, one array per entry."""
        return [r.event_marginals for r in self._infer(X)]

    def map_sets(self, X):
        """Most probable set of intrusion event indices, one per entry."""
        return [r.map.intrusion_indices for r in self._infer(X)]
