"""Event sequences, mark densities and the log-domain posterior factors.

Vertex numbering
----------------
Factor tables use the numbering of the intrusion graph: vertex ``0`` is the
virtual process event before the window, vertices ``1..N`` are the observed
events and vertex ``N + 1`` is the virtual event after the window.  Observed
event ``i`` of an :class:`EventSequence` (0-based, as everywhere else in the
public API) is vertex ``i + 1``.

For a non-intrusion path ``k_1 < ... < k_m`` the unnormalized log posterior
of the complementary intrusion set is::

    log_P[k_1] + sum(log_Q[k_j, k_{j+1}]) + log_R[k_m]

and the all-intrusion hypothesis contributes ``log_P[N + 1]`` alone.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import DomainError, EstimationError, ParameterError
from .intervals import IntervalModel

__all__ = [
    "Event",
    "EventSequence",
    "MarkModel",
    "FactorTable",
    "build_factors",
    "log_prob_subsequence",
    "fit_mark_model",
    "check_probability",
]


class Event(NamedTuple):
    t: float
    mark: Optional[float] = None
    label: Optional[bool] = None  # True marks an intrusion event


def _frozen(arr):
    arr = np.array(arr, dtype=arr.dtype if isinstance(arr, np.ndarray) else None)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EventSequence:
    """An observation window ``[t_start, t_end]`` and the events inside it.

    ``marks`` and ``labels`` are either ``None`` or arrays aligned with
    ``times``.  Labels are ground truth for evaluation and never read by
    inference.
    """

    t_start: float
    t_end: float
    times: np.ndarray
    marks: Optional[np.ndarray] = None
    labels: Optional[np.ndarray] = None
    entry_id: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        t_start, t_end = float(self.t_start), float(self.t_end)
        times = np.asarray(self.times, dtype=float).ravel()
        name = f"entry {self.entry_id!r}: " if self.entry_id is not None else ""
        if not (math.isfinite(t_start) and math.isfinite(t_end)):
            raise DomainError(f"{name}window bounds must be finite")
        if not t_end > t_start:
            raise DomainError(f"{name}t_end must exceed t_start ({t_start} >= {t_end})")
        if not np.all(np.isfinite(times)):
            raise DomainError(f"{name}event times must be finite")
        if times.size and (times[0] < t_start or times[-1] > t_end):
            raise DomainError(f"{name}events must lie within [t_start, t_end]")
        if np.any(np.diff(times) < 0):
            raise DomainError(f"{name}event times must be sorted")
        marks = self.marks
        if marks is not None:
            marks = np.asarray(marks, dtype=float).ravel()
            if marks.shape != times.shape:
                raise DomainError(f"{name}marks must align with events")
            if not np.all(marks > 0) or not np.all(np.isfinite(marks)):
                raise DomainError(f"{name}marks must be positive and finite")
            marks = _frozen(marks)
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels).ravel()
            if labels.shape != times.shape:
                raise DomainError(f"{name}labels must align with events")
            labels = _frozen(labels.astype(bool))
        object.__setattr__(self, "t_start", t_start)
        object.__setattr__(self, "t_end", t_end)
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_events(cls, t_start, t_end, events, entry_id=None):
        """Build from :class:`Event` tuples (or ``(t, mark, label)`` triples)."""
        events = [Event(*e) if not isinstance(e, Event) else e for e in events]
        times = [e.t for e in events]
        has_mark = [e.mark is not None for e in events]
        if any(has_mark) and not all(has_mark):
            raise DomainError("marks must be present on all events or on none")
        marks = [e.mark for e in events] if events and all(has_mark) else None
        has_label = [e.label is not None for e in events]
        labels = [bool(e.label) for e in events] if events and all(has_label) else None
        return cls(t_start, t_end, times, marks, labels, entry_id)

    @property
    def n(self):
        return self.times.size

    def __len__(self):
        return self.n

    @property
    def duration(self):
        return self.t_end - self.t_start

    @property
    def events(self):
        marks = self.marks if self.marks is not None else [None] * self.n
        labels = self.labels if self.labels is not None else [None] * self.n
        return [
            Event(float(t), None if m is None else float(m), None if y is None else bool(y))
            for t, m, y in zip(self.times, marks, labels)
        ]

    @property
    def has_marks(self):
        return self.marks is not None

    @property
    def is_labeled(self):
        return self.labels is not None or self.n == 0

    @property
    def intrusion_indices(self):
        """Ground-truth intrusion indices, from labels."""
        if self.labels is None:
            return frozenset()
        return frozenset(np.flatnonzero(self.labels).tolist())

    @property
    def is_positive(self):
        return bool(self.labels is not None and self.labels.any())

    def interior_intervals(self):
        return np.diff(self.times)

    def _replace(self, **changes):
        fields = dict(
            t_start=self.t_start, t_end=self.t_end, times=self.times,
            marks=self.marks, labels=self.labels, entry_id=self.entry_id,
        )
        fields.update(changes)
        return EventSequence(**fields)

    def reversed(self):
        """Mirror time: ``t -> -t`` with events (and marks, labels) reversed."""
        return self._replace(
            t_start=-self.t_end,
            t_end=-self.t_start,
            times=-self.times[::-1],
            marks=None if self.marks is None else self.marks[::-1],
            labels=None if self.labels is None else self.labels[::-1],
        )

    def subset(self, keep):
        """Sequence restricted to event indices ``keep`` (window unchanged)."""
        keep = np.sort(np.asarray(sorted(keep), dtype=int))
        return self._replace(
            times=self.times[keep],
            marks=None if self.marks is None else self.marks[keep],
            labels=None if self.labels is None else self.labels[keep],
        )

    def without(self, drop):
        drop = set(drop)
        return self.subset([i for i in range(self.n) if i not in drop])

    def without_labels(self):
        return self._replace(labels=None)

    def without_marks(self):
        return self._replace(marks=None)

    def __repr__(self):
        return (
            f"EventSequence(t_start={self.t_start!r}, t_end={self.t_end!r}, n={self.n}, "
            f"marks={self.has_marks}, labels={self.labels is not None}, "
            f"entry_id={self.entry_id!r})"
        )


@dataclass(frozen=True)
class MarkModel:
    """LogNormal density of per-event marks, independent of intervals."""

    mu: float
    sigma: float
    family: str = "lognormal"

    def __post_init__(self):
        if self.family != "lognormal":
            raise ParameterError(f"unsupported mark family {self.family!r}")
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ParameterError("mark parameters must be finite")
        if not self.sigma > 0:
            raise ParameterError(f"mark sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def log_mean_density(self):
        # log E[g(y)] = log int g^2 = -log(2 sigma sqrt(pi)) + sigma^2 / 4 - mu
        s = self.sigma
        return -math.log(2.0 * s * math.sqrt(math.pi)) + s * s / 4.0 - self.mu

    def log_density(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0):
            raise DomainError("marks must be positive")
        z = (np.log(y) - self.mu) / self.sigma
        out = -0.5 * z * z - np.log(y) - math.log(self.sigma) - 0.5 * math.log(2.0 * math.pi)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, size=None):
        return rng.lognormal(self.mu, self.sigma, size=size)

    def to_dict(self):
        return {"family": self.family, "mu": self.mu, "sigma": self.sigma}


def fit_mark_model(marks):
    """LogNormal maximum likelihood: mean and standard deviation of ``log y``."""
    y = np.asarray(marks, dtype=float).ravel()
    if y.size and (np.any(y <= 0) or not np.all(np.isfinite(y))):
        raise EstimationError("marks must be positive and finite")
    if np.unique(y).size < 2:
        raise EstimationError("mark fit needs at least two distinct values")
    logs = np.log(y)
    sigma = float(logs.std())
    if not sigma > 0:
        raise EstimationError("marks have zero log-variance")
    return MarkModel(float(logs.mean()), sigma)


def check_probability(p_epsilon):
    p = float(p_epsilon)
    if not 0.0 < p < 1.0:
        raise ParameterError(f"p_epsilon must lie in the open interval (0, 1), got {p_epsilon}")
    return p


@dataclass(frozen=True, eq=False)
class FactorTable:
    """Log-domain transition factors for one sequence.

    ``log_P`` has length ``N + 2`` (entry 0 unused, ``-inf``), ``log_R``
    has length ``N + 1`` with ``log_R[0] == 0`` and ``log_Q`` is an
    ``(N + 1, N + 1)`` matrix whose entries with ``j < k`` (both >= 1) are
    meaningful; the rest are ``-inf``.  ``log_mark[k]`` is the mark term
    already folded into every factor entering vertex ``k`` (zero without
    marks).
    """

    n: int
    log_P: np.ndarray
    log_Q: np.ndarray
    log_R: np.ndarray
    log_mark: np.ndarray
    p_epsilon: float


def build_factors(seq, model, p_epsilon, marks=None):
    """Compute the :class:`FactorTable` of ``seq`` under ``model``.

    Every factor carries the ``1 / E[f]`` normalisation.  With a
    :class:`MarkModel`, each factor entering a non-intrusion event ``k`` is
    multiplied by ``g(y_k) / E[g]``; intrusion events contribute mark factor 1.
    """
    if not isinstance(model, IntervalModel):
        raise ParameterError("model must be an IntervalModel")
    p = check_probability(p_epsilon)
    if marks is not None and not seq.has_marks:
        raise ParameterError("a mark model was given but the sequence carries no marks")
    n = seq.n
    t = seq.times
    log_e = model.log_mean_density()
    log_p = math.log(p)
    log_1mp = math.log1p(-p)
    ks = np.arange(1, n + 1)

    log_P = np.full(n + 2, -np.inf)
    d_start = t - seq.t_start
    log_P[1:n + 1] = (
        -log_e + (ks - 1) * log_p + model.log_sq_tail(d_start) - model.log_survival(d_start)
    )
    T = seq.duration
    log_P[n + 1] = -log_e + n * log_p + model.log_lb_sq_tail(T) - model.log_lb_tail(T)

    log_R = np.empty(n + 1)
    log_R[0] = 0.0
    d_end = seq.t_end - t
    log_R[1:] = (
        -log_e + log_1mp + (n - ks) * log_p
        + model.log_sq_tail(d_end) - model.log_survival(d_end)
    )

    log_Q = np.full((n + 1, n + 1), -np.inf)
    if n > 1:
        gaps = t[None, :] - t[:, None]
        upper = np.triu(np.ones((n, n), dtype=bool), 1)
        skipped = (ks[None, :] - ks[:, None] - 1).astype(float)
        dens = model.log_density(np.where(upper, gaps, 0.0))
        if np.any(np.isposinf(dens[upper])):
            raise DomainError(
                "coincident events have infinite density for shape < 1"
            )
        inner = -log_e + log_1mp + skipped * log_p + dens
        log_Q[1:, 1:] = np.where(upper, inner, -np.inf)

    log_mark = np.zeros(n + 1)
    if marks is not None:
        log_mark[1:] = marks.log_density(seq.marks) - marks.log_mean_density
        log_P[1:n + 1] += log_mark[1:]
        log_Q[:, 1:] += log_mark[None, 1:]

    for arr in (log_P, log_Q, log_R, log_mark):
        arr.setflags(write=False)
    return FactorTable(n, log_P, log_Q, log_R, log_mark, p)


def _path_vertices(n, intrusion_indices):
    intrusion = set()
    for i in intrusion_indices:
        if isinstance(i, bool) or int(i) != i or not 0 <= int(i) < n:
            raise DomainError(f"intrusion index {i!r} out of range for {n} events")
        intrusion.add(int(i))
    return [i + 1 for i in range(n) if i not in intrusion]


def log_prob_subsequence(factors, intrusion_indices):
    """Unnormalized log posterior of the intrusion set ``intrusion_indices``.

    Indices are 0-based event positions.
    """
    path = _path_vertices(factors.n, intrusion_indices)
    if not path:
        return float(factors.log_P[factors.n + 1])
    # same summation order as the shortest-path sweep
    total = factors.log_P[path[0]]
    for a, b in zip(path, path[1:]):
        total += factors.log_Q[a, b]
    total += factors.log_R[path[-1]]
    return float(total)
