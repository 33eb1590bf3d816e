"""Exception hierarchy used across the package."""

from __future__ import annotations


class MNLabError(Exception):
    """Base class for all package errors."""


class DomainError(MNLabError, ValueError):
    """Inputs lie outside the domain where a quantity is defined."""


class NumericalError(MNLabError):
    """A numerical procedure failed to produce a trustworthy result."""


class ConvergenceError(NumericalError):
    """An iterative or adaptive procedure did not reach its tolerance.

    Attributes
    ----------
    estimate : float
        Best available estimate at the point of failure.
    error_bound : float
        Error estimate attached to ``estimate``.
    """

    def __init__(self, message: str, estimate: float = float("nan"),
                 error_bound: float = float("inf")) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class IntegrationError(NumericalError):
    """The ODE integrator gave up (step size collapse or step budget)."""


class BracketError(NumericalError):
    """A root could not be bracketed on the search interval."""

    def __init__(self, message: str, **diagnostics: float) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics


class VerificationError(NumericalError):
    """A computed solution failed its independent verification."""


class NoSolutionError(MNLabError):
    """No positive solution exists for the requested parameters."""


class LandscapeError(MNLabError):
    """The angle landscape does not have the shape required for matching."""


class UnsupportedLandscapeError(LandscapeError):
    """The landscape has more than one interior peak."""


class ThresholdNotFoundError(NumericalError):
    """An empirical threshold search found no transition on its interval."""
