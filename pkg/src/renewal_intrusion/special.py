"""Log of the regularized upper incomplete gamma function.

Every tail integral of the Gamma family reduces to ``Q(a, x)``.  Evaluating
it in log space lets tails far beyond double-precision underflow (``x`` in
the thousands) still produce finite log factors.
"""

import math

import numpy as np

from .exceptions import DomainError, NumericError

_TINY = 1e-300


def _log_prefactor(a, x):
    # log(x**a * exp(-x) / Gamma(a))
    return a * np.log(x) - x - math.lgamma(a)


def _lower_series(a, x, rtol, max_iter):
    """Series for P(a, x), valid (and fast) for x < a + 1."""
    term = np.full_like(x, 1.0 / a)
    total = term.copy()
    ap = a
    active = np.ones(x.shape, dtype=bool)
    for _ in range(max_iter):
        ap += 1.0
        term = np.where(active, term * x / ap, term)
        total = np.where(active, total + term, total)
        active &= np.abs(term) > np.abs(total) * rtol
        if not active.any():
            break
    else:
        raise NumericError(f"incomplete gamma series did not converge for a={a}")
    return np.exp(_log_prefactor(a, x)) * total


def _upper_fraction(a, x, rtol, max_iter):
    """Modified Lentz continued fraction; returns log of the fraction part of Q(a, x)."""
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > rtol
        if not active.any():
            break
    else:
        raise NumericError(f"incomplete gamma continued fraction did not converge for a={a}")
    return np.log(h)


def log_gammaincc(a, x, rtol=1e-15, max_iter=100_000):
    """Natural log of the regularized upper incomplete gamma ``Q(a, x)``.

    ``a`` is a positive scalar; ``x`` may be a scalar or an array of
    non-negative values.  Uses the power series below ``x = a + 1`` and a
    continued fraction above it.
    """
    if not a > 0:
        raise DomainError(f"shape parameter must be positive, got {a}")
    xs = np.asarray(x, dtype=float)
    if np.any(np.isnan(xs)) or np.any(xs < 0):
        raise DomainError("incomplete gamma argument must be non-negative")
    flat = np.atleast_1d(xs).ravel()
    out = np.empty_like(flat)

    zero = flat == 0.0
    inf = np.isinf(flat)
    small = ~zero & ~inf & (flat < a + 1.0)
    large = ~zero & ~inf & ~small
    out[zero] = 0.0
    out[inf] = -np.inf
    if small.any():
        xv = flat[small]
        lower = _lower_series(a, xv, rtol, max_iter)
        out[small] = np.log1p(-lower)
    if large.any():
        xv = flat[large]
        out[large] = _log_prefactor(a, xv) + _upper_fraction(a, xv, rtol, max_iter)

    if xs.ndim == 0:
        return float(out[0])
    return out.reshape(xs.shape)


def gammaincc(a, x):
    """Regularized upper incomplete gamma ``Q(a, x)``."""
    return np.exp(log_gammaincc(a, x))
