"""Exception hierarchy for statdim.

Every error raised deliberately by this package derives from
:class:`StatdimError`, so callers can catch one type at the CLI boundary.
``DomainError`` doubles as a ``ValueError`` because most misuse is a bad
argument value.
"""
from __future__ import annotations

__all__ = [
    "StatdimError",
    "DomainError",
    "SingularMatrixError",
    "UnboundedWeightError",
    "NoConvergenceError",
    "QuadratureError",
    "ConfigError",
]


class StatdimError(Exception):
    """Base class for all statdim errors."""


class DomainError(StatdimError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class SingularMatrixError(StatdimError):
    """A matrix required to have full column rank is (numerically) rank-deficient."""


class UnboundedWeightError(StatdimError):
    """The optimal weight for some partition is +infinity.

    Happens exactly when a partition contains no support element: every
    term of the objective involving that weight is nonincreasing, so the
    infimum is approached as the weight grows without bound.  Callers who
    want "known zero" partitions should drop those indices from the
    problem instead (the harness does this by adding equality constraints).
    """


class NoConvergenceError(StatdimError):
    """An iterative method exhausted its iteration budget.

    The best iterate found is attached as ``best`` when available.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class QuadratureError(StatdimError):
    """Adaptive quadrature failed to reach the configured tolerance."""


class ConfigError(StatdimError):
    """An experiment configuration is missing a key or has a bad value."""
