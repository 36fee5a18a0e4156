"""Interarrival-interval distributions of a renewal process.

An :class:`IntervalModel` is an Exponential or Gamma distribution with a
shape/rate parametrisation.  Besides the density it supplies, in log space,
every tail integral the posterior factors need:

====================  =========================================
``log_survival(x)``   ``log int_x^inf f(t) dt``
``log_sq_tail(x)``    ``log int_x^inf f(t)^2 dt``
``log_lb_tail(T)``    ``log int_T^inf (t - T) f(t) dt``
``log_lb_sq_tail(T)`` ``log int_T^inf (t - T) f(t)^2 dt``
====================  =========================================

All of them reduce to the regularized upper incomplete gamma function.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import digamma, polygamma, xlogy

from .exceptions import DomainError, EstimationError, NumericError, ParameterError
from .special import log_gammaincc

__all__ = [
    "Family",
    "IntervalModel",
    "fit_mle",
    "quadrature_reference",
    "log_diff_exp",
]

_LOG2 = math.log(2.0)


class Family(str, enum.Enum):
    EXPONENTIAL = "exponential"
    GAMMA = "gamma"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(
                f"unknown interval family {value!r}; expected one of "
                f"{[f.value for f in cls]}"
            ) from None


def log_diff_exp(log_a, log_b):
    """``log(exp(log_a) - exp(log_b))`` for ``log_a >= log_b``, elementwise."""
    log_a = np.asarray(log_a, dtype=float)
    log_b = np.asarray(log_b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = np.where(np.isneginf(log_b), -np.inf, log_b - log_a)
        out = log_a + np.log1p(-np.exp(diff))
    out = np.where(np.isneginf(log_b), log_a, out)
    # rounding can push the difference marginally negative
    out = np.where(log_b > log_a, -np.inf, out)
    return out if out.ndim else float(out)


def _check_nonnegative(x, name):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative, got {x!r}")
    return arr


def _scalar_or_array(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


@dataclass(frozen=True)
class IntervalModel:
    """Interarrival distribution ``Gamma(shape, rate)``.

    ``Exponential(rate)`` is the ``shape == 1`` special case and shares every
    code path with it.  Shapes at or below 0.5 are rejected: the squared
    density is not integrable at zero there, so the expected density
    ``E[f(tau)]`` that normalises the posterior factors would be infinite.
    """

    family: Family
    shape: float
    rate: float

    def __post_init__(self):
        family = Family.parse(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "shape", float(self.shape))
        object.__setattr__(self, "rate", float(self.rate))
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise ParameterError(f"rate must be a positive finite number, got {self.rate}")
        if family is Family.EXPONENTIAL and self.shape != 1.0:
            raise ParameterError(f"exponential model has shape 1, got {self.shape}")
        if not (math.isfinite(self.shape) and self.shape > 0.5):
            raise ParameterError(
                f"shape must exceed 0.5 so that E[f(tau)] is finite, got {self.shape}"
            )

    @classmethod
    def exponential(cls, rate):
        return cls(Family.EXPONENTIAL, 1.0, rate)

    @classmethod
    def gamma(cls, shape, rate):
        return cls(Family.GAMMA, shape, rate)

    @property
    def mean(self):
        return self.shape / self.rate

    def to_dict(self):
        return {"family": self.family.value, "shape": self.shape, "rate": self.rate}

    # density and tails

    def log_density(self, tau):
        """Log density; ``-inf`` at ``tau = 0`` when ``shape > 1``."""
        tau = _check_nonnegative(tau, "tau")
        k, lam = self.shape, self.rate
        with np.errstate(divide="ignore"):
            out = xlogy(k - 1.0, tau) - lam * tau + k * math.log(lam) - math.lgamma(k)
        return _scalar_or_array(out)

    def log_survival(self, x):
        x = _check_nonnegative(x, "x")
        return log_gammaincc(self.shape, self.rate * x)

    def log_mean_density(self):
        """``log E[f(tau)]``, equal to ``log_sq_tail(0)``."""
        k = self.shape
        return (
            math.log(self.rate)
            + math.lgamma(2.0 * k - 1.0)
            - 2.0 * math.lgamma(k)
            - (2.0 * k - 1.0) * _LOG2
        )

    def log_sq_tail(self, x):
        # f^2 is proportional to a Gamma(2k - 1, 2 * rate) density
        x = _check_nonnegative(x, "x")
        tail = log_gammaincc(2.0 * self.shape - 1.0, 2.0 * self.rate * x)
        return _scalar_or_array(self.log_mean_density() + tail)

    def _log_first_moment_sq_tail(self, x):
        # log int_x^inf t f(t)^2 dt; t f^2 is proportional to Gamma(2k, 2 * rate)
        k = self.shape
        const = math.lgamma(2.0 * k) - 2.0 * math.lgamma(k) - 2.0 * k * _LOG2
        return const + log_gammaincc(2.0 * k, 2.0 * self.rate * x)

    def log_lb_sq_tail(self, T):
        T = _check_nonnegative(T, "T")
        with np.errstate(divide="ignore"):
            log_T = np.log(T)
        first = self._log_first_moment_sq_tail(T)
        return log_diff_exp(first, log_T + self.log_sq_tail(T))

    def log_lb_tail(self, T):
        T = _check_nonnegative(T, "T")
        k, lam = self.shape, self.rate
        with np.errstate(divide="ignore"):
            log_T = np.log(T)
        first = math.log(k / lam) + log_gammaincc(k + 1.0, lam * T)
        return log_diff_exp(first, log_T + log_gammaincc(k, lam * T))

    # sampling

    def sample(self, rng, size=None):
        """Draw intervals using a ``numpy.random.Generator``."""
        if self.family is Family.EXPONENTIAL:
            return rng.exponential(1.0 / self.rate, size=size)
        return rng.gamma(self.shape, 1.0 / self.rate, size=size)

    def cdf(self, x):
        x = _check_nonnegative(x, "x")
        return -np.expm1(self.log_survival(x))


def fit_mle(family, intervals, max_iter=100, tol=1e-10, min_shape=None):
    """Maximum-likelihood :class:`IntervalModel` for observed intervals.

    Exponential: ``rate = 1 / mean``.  Gamma: Newton iteration on
    ``log k - digamma(k) = log(mean) - mean(log x)`` started from the
    method-of-moments shape; ``rate = k / mean``.

    A Gamma shape at or below 0.5 is an error unless ``min_shape`` (> 0.5)
    is given, in which case the shape is constrained to ``>= min_shape``.
    The profile likelihood is concave in the shape, so the constrained
    maximum is the clipped unconstrained one.
    """
    if min_shape is not None and not min_shape > 0.5:
        raise ParameterError(f"min_shape must exceed 0.5, got {min_shape}")
    family = Family.parse(family)
    x = np.asarray(intervals, dtype=float).ravel()
    if x.size == 0:
        raise EstimationError("cannot fit an interval model to no intervals")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise EstimationError("intervals must be positive and finite")
    mean = float(x.mean())
    if family is Family.EXPONENTIAL:
        return IntervalModel.exponential(1.0 / mean)

    if np.unique(x).size < 2:
        raise EstimationError(
            "gamma fit needs at least two distinct intervals; shape diverges on constant data"
        )
    s = math.log(mean) - float(np.log(x).mean())
    if not s > 0:
        raise EstimationError("intervals have numerically zero log-variance; shape diverges")
    var = float(x.var())
    k = mean * mean / var if var > 0 else 1.0 / s
    for _ in range(max_iter):
        g = math.log(k) - digamma(k) - s
        dg = 1.0 / k - polygamma(1, k)
        step = g / dg
        k_new = k - step
        if k_new <= 0:
            k_new = k / 2.0
        if abs(k_new - k) <= tol * k:
            k = k_new
            break
        k = k_new
    else:
        raise EstimationError("gamma shape iteration did not converge")
    if min_shape is not None and k < min_shape:
        k = float(min_shape)
    if k <= 0.5:
        raise EstimationError(
            f"fitted gamma shape {k:.4g} <= 0.5: E[f(tau)] would be infinite"
        )
    return IntervalModel.gamma(k, k / mean)


_INTEGRANDS = ("survival", "sq_tail", "lb_tail", "lb_sq_tail")


def quadrature_reference(model, integrand, x, rtol=1e-10):
    """Evaluate one of the tail integrals by adaptive quadrature.

    Linear (not log) value.  Used to validate the closed forms.  The upper
    limit is pushed out until the survival there is below ``1e-14`` times
    the survival at ``x`` (and so below ``1e-14`` in absolute terms).
    """
    if integrand not in _INTEGRANDS:
        raise ParameterError(f"integrand must be one of {_INTEGRANDS}, got {integrand!r}")
    x = float(x)
    if not x >= 0:
        raise DomainError(f"x must be non-negative, got {x}")
    k, lam = model.shape, model.rate

    def dens(t):
        if t == 0.0:
            return math.exp(model.log_density(0.0))
        return math.exp((k - 1.0) * math.log(t) - lam * t + k * math.log(lam) - math.lgamma(k))

    funcs = {
        "survival": dens,
        "sq_tail": lambda t: dens(t) ** 2,
        "lb_tail": lambda t: (t - x) * dens(t),
        "lb_sq_tail": lambda t: (t - x) * dens(t) ** 2,
    }
    func = funcs[integrand]

    upper = max(x, model.mean) + model.mean
    cutoff = model.log_survival(x) + math.log(1e-14)
    while model.log_survival(upper) >= cutoff:
        upper += upper
    mode = (k - 1.0) / lam if k > 1 else 0.0
    points = [p for p in (mode, model.mean) if x < p < upper] or None
    value, _, info, *rest = integrate.quad(
        func, x, upper, epsabs=0.0, epsrel=rtol * 1e-2, limit=1000,
        points=points, full_output=1,
    )
    if rest:
        raise NumericError(f"quadrature failed for {integrand} at x={x}: {rest[0]}")
    return value
