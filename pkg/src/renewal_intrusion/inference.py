"""Posterior inference over intrusion subsets.

Three quadratic-time algorithms work on a :class:`~.model.FactorTable`:

* :func:`map_subsequence` finds the most probable intrusion set as a
  shortest path through the forward-complete DAG of events;
* :func:`log_marginal_likelihood` sums the unnormalized posterior over all
  ``2**N`` intrusion sets with a forward recursion;
* :func:`infer_all` runs the recursion forward and on the time-reversed
  sequence and combines the two into per-event marginals.

:func:`brute_force_posterior` enumerates every subset and is the reference
the fast paths are tested against.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DomainError
from .model import build_factors, check_probability, log_prob_subsequence

__all__ = [
    "MapResult",
    "InferenceResult",
    "BruteForceResult",
    "map_subsequence",
    "log_marginal_likelihood",
    "infer_all",
    "brute_force_posterior",
    "logsumexp",
]

BRUTE_FORCE_MAX_EVENTS = 20


def logsumexp(values):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return -np.inf
    m = values.max()
    if m == -np.inf:
        return -np.inf
    return float(m + np.log(np.exp(values - m).sum()))


@dataclass(frozen=True)
class MapResult:
    intrusion_indices: frozenset
    log_posterior: float
    path_length: float


@dataclass(frozen=True, eq=False)
class InferenceResult:
    log_marginal: float
    intrusion_probability: float
    event_marginals: np.ndarray
    log_forward: np.ndarray
    log_backward: np.ndarray
    map: Optional[MapResult] = None


@dataclass(frozen=True, eq=False)
class BruteForceResult:
    log_marginal: float
    intrusion_probability: float
    event_marginals: np.ndarray
    map_set: frozenset
    map_log_posterior: float


def map_subsequence(factors):
    """Most probable intrusion set via a DAG shortest path.

    Vertices ``0..N+1`` are visited in index order; edge ``(0, k)`` weighs
    ``-log_P[k]`` (so ``(0, N+1)`` is the all-intrusion path), ``(j, N+1)``
    weighs ``-log_R[j]`` and ``(j, k)`` weighs ``-log_Q[j, k]``.  Among
    equally short paths the one through more events wins, then the one with
    the smallest predecessor.
    """
    n = factors.n
    P, R = factors.log_P, factors.log_R
    Qt = np.ascontiguousarray(factors.log_Q.T)
    dist = np.empty(n + 2)
    count = np.zeros(n + 2, dtype=np.int64)
    pred = np.zeros(n + 2, dtype=np.int64)
    dist[0] = 0.0
    with np.errstate(invalid="ignore"):
        for k in range(1, n + 2):
            into = R[1:k] if k == n + 1 else Qt[k, 1:k]
            cand = np.empty(k)
            cand[0] = -P[k]
            cand[1:] = dist[1:k] - into
            best = cand.min()
            ties = np.flatnonzero(cand == best)
            if ties.size > 1:
                ties = ties[count[ties] == count[ties].max()]
            j = int(ties[0]) if ties.size else 0
            dist[k] = cand[j]
            pred[k] = j
            count[k] = count[j] + 1
    on_path = set()
    v = pred[n + 1]
    while v != 0:
        on_path.add(int(v) - 1)
        v = pred[v]
    intrusion = frozenset(i for i in range(n) if i not in on_path)
    return MapResult(intrusion, log_prob_subsequence(factors, intrusion), float(dist[n + 1]))


def log_marginal_likelihood(factors):
    """Return ``(log_A, log_a)``: the log marginal likelihood and the forward terms.

    ``log_a[i]`` (0-based event ``i``) sums, over all intrusion sets whose
    last non-intrusion event up to ``i`` is ``i`` itself, the product of the
    factors from the window start to ``i``.
    """
    n = factors.n
    P, R = factors.log_P, factors.log_R
    Qt = np.ascontiguousarray(factors.log_Q.T)
    a = np.full(n + 1, -np.inf)
    for k in range(1, n + 1):
        if k == 1:
            a[1] = P[1]
            continue
        terms = a[1:k] + Qt[k, 1:k]
        a[k] = np.logaddexp(P[k], logsumexp(terms))
    log_A = float(np.logaddexp(P[n + 1], logsumexp(a[1:] + R[1:])))
    return log_A, a[1:].copy()


def _probability_complement(log_part, log_total):
    # 1 - exp(log_part - log_total), clipped against rounding
    with np.errstate(invalid="ignore"):
        out = -np.expm1(np.minimum(np.asarray(log_part, dtype=float) - log_total, 0.0))
    return np.clip(out, 0.0, 1.0)


def infer_all(seq, model, p_epsilon, marks=None, compute_map=False):
    """Intrusion probability and per-event intrusion marginals of ``seq``.

    The backward terms come from the forward recursion on the mirrored
    sequence.  A forward term and a backward term both contain the factor
    entering their shared event, which under this factor normalisation
    holds one ``(1 - p)`` too few in total and the event's mark term once
    too often; the combination corrects both.
    """
    p = check_probability(p_epsilon)
    factors = build_factors(seq, model, p, marks)
    log_A, log_f = log_marginal_likelihood(factors)
    log_empty = log_prob_subsequence(factors, ())
    intrusion_probability = float(_probability_complement(log_empty, log_A))

    backward = build_factors(seq.reversed(), model, p, marks)
    _, log_b_rev = log_marginal_likelihood(backward)
    log_b = log_b_rev[::-1].copy()

    log_not_in = log_f + log_b + math.log1p(-p) - factors.log_mark[1:]
    marginals = _probability_complement(log_not_in, log_A)
    map_result = map_subsequence(factors) if compute_map else None
    return InferenceResult(log_A, intrusion_probability, marginals, log_f, log_b, map_result)


def brute_force_posterior(factors):
    """Enumerate all ``2**N`` intrusion sets.  Refuses ``N > 20``."""
    n = factors.n
    if n > BRUTE_FORCE_MAX_EVENTS:
        raise DomainError(
            f"brute-force enumeration is limited to {BRUTE_FORCE_MAX_EVENTS} events, got {n}"
        )
    subsets = []
    logs = []
    for bits in itertools.product((False, True), repeat=n):
        subset = tuple(i for i, b in enumerate(bits) if b)
        subsets.append(subset)
        logs.append(log_prob_subsequence(factors, subset))
    logs = np.array(logs)
    log_A = logsumexp(logs)

    empty = logs[0]
    intrusion_probability = float(_probability_complement(empty, log_A))
    marginals = np.zeros(n)
    for i in range(n):
        log_not = logsumexp([lp for s, lp in zip(subsets, logs) if i not in s])
        marginals[i] = _probability_complement(log_not, log_A)

    best = logs.max()
    candidates = [s for s, lp in zip(subsets, logs) if lp == best]
    map_set = min(candidates)
    return BruteForceResult(log_A, intrusion_probability, marginals, frozenset(map_set), float(best))
