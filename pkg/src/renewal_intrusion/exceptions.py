"""Exception hierarchy.

All errors derive from ``ValueError`` or ``ArithmeticError`` so callers that
only care about "bad input" can catch the builtin base.
"""


class IntrusionError(Exception):
    """Base class for errors raised by this package."""


class DomainError(IntrusionError, ValueError):
    """An argument lies outside the domain of an operation."""


class ParameterError(IntrusionError, ValueError):
    """A model or algorithm parameter is invalid."""


class EstimationError(IntrusionError, ValueError):
    """Parameters cannot be estimated from the supplied data."""


class EvaluationError(IntrusionError, ValueError):
    """A metric is undefined for the supplied data."""


class NumericError(IntrusionError, ArithmeticError):
    """A numeric routine failed to converge."""


class FormatError(IntrusionError, ValueError):
    """A data file record is malformed."""
