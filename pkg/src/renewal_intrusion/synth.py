"""Synthetic renewal-process entries with injected intrusions.

A negative entry is a stretch of a renewal process: ``n_events + 2``
arrivals starting at 0, where the first and last arrival become the window
bounds and are dropped.  A positive entry draws ``K >= 1`` intrusion events
from a zero-truncated ``Binomial(n_events, injection_rate)``, simulates
``n_events - K`` process events the same way and scatters the ``K``
intrusion events uniformly over a random subinterval whose length is
uniform on ``[0, 2T/3]`` (mean ``T/3``).
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import ParameterError
from .intervals import IntervalModel
from .model import EventSequence, MarkModel

__all__ = ["GenSpec", "gen_entry", "gen_dataset", "positive_flags"]


@dataclass(frozen=True)
class GenSpec:
    interval_model: IntervalModel
    injection_rate: float
    n_events: int = 20
    positive_fraction: float = 0.5
    mark_models: Optional[Tuple[MarkModel, MarkModel]] = None  # (process, intrusion)
    seed: int = 0

    def __post_init__(self):
        if int(self.n_events) != self.n_events or self.n_events < 2:
            raise ParameterError(f"n_events must be an integer >= 2, got {self.n_events}")
        if not 0.0 < self.injection_rate < 1.0:
            raise ParameterError(f"injection_rate must lie in (0, 1), got {self.injection_rate}")
        if not 0.0 <= self.positive_fraction <= 1.0:
            raise ParameterError(
                f"positive_fraction must lie in [0, 1], got {self.positive_fraction}"
            )
        if self.mark_models is not None and len(self.mark_models) != 2:
            raise ParameterError("mark_models must be a (process, intrusion) pair")


def _truncated_binomial(rng, n, p):
    while True:
        k = int(rng.binomial(n, p))
        if k >= 1:
            return k


def gen_entry(spec, positive, rng, entry_id=None):
    n = spec.n_events
    k = _truncated_binomial(rng, n, spec.injection_rate) if positive else 0
    arrivals = np.concatenate(([0.0], np.cumsum(spec.interval_model.sample(rng, n - k + 1))))
    t_start, t_end = arrivals[0], arrivals[-1]
    process = arrivals[1:-1]

    duration = t_end - t_start
    length = rng.uniform(0.0, 2.0 * duration / 3.0)
    begin = rng.uniform(t_start, t_end - length)
    intrusion = rng.uniform(begin, begin + length, size=k)

    times = np.concatenate((process, intrusion))
    labels = np.concatenate((np.zeros(n - k, dtype=bool), np.ones(k, dtype=bool)))
    marks = None
    if spec.mark_models is not None:
        proc_marks, intr_marks = spec.mark_models
        marks = np.concatenate((proc_marks.sample(rng, n - k), intr_marks.sample(rng, k)))
    order = np.argsort(times, kind="stable")
    return EventSequence(
        t_start, t_end, times[order],
        None if marks is None else marks[order],
        labels[order],
        entry_id,
    )


def positive_flags(n_entries, positive_fraction):
    """Deterministic interleaving with exactly ``floor(fraction * n)`` positives."""
    i = np.arange(n_entries)
    return np.floor((i + 1) * positive_fraction + 1e-12) > np.floor(i * positive_fraction + 1e-12)


def gen_dataset(spec, n_entries):
    if int(n_entries) != n_entries or n_entries < 2:
        raise ParameterError(f"n_entries must be an integer >= 2, got {n_entries}")
    flags = positive_flags(n_entries, spec.positive_fraction)
    children = np.random.SeedSequence(spec.seed).spawn(n_entries)
    return [
        gen_entry(spec, bool(flag), np.random.default_rng(child), entry_id=str(i))
        for i, (flag, child) in enumerate(zip(flags, children))
    ]
