"""Exception hierarchy used across the package."""

from __future__ import annotations


class MultistopError(Exception):
    """Base class for every error raised by this package."""


class ModelError(MultistopError, ValueError):
    """Malformed model, contract or refraction parameters."""


class PoleError(MultistopError, ValueError):
    """Laplace exponent evaluated (numerically) on one of its poles."""


class DegenerateRootsError(MultistopError):
    """Two roots of psi(beta) = q are too close to be told apart."""


class NoRootInStripError(MultistopError):
    """psi(beta) = q has no crossing in (0, beta0)."""


class OutOfStripError(MultistopError, ValueError):
    """Argument lies outside the half-plane where a transform is analytic."""


class DivergentConvolutionError(MultistopError):
    """An integral against an exponential density does not converge."""

    def __init__(self, message: str, tail: str | None = None, growth: float | None = None,
                 decay: float | None = None):
        super().__init__(message)
        self.tail = tail
        self.growth = growth
        self.decay = decay


class DegreeCapError(MultistopError):
    """Polynomial degree of an ExpPoly term exceeds the configured cap."""


class BelowStrikeError(MultistopError, ValueError):
    """Exercise level below log-strike."""


class BracketFailureError(MultistopError):
    """First-order condition does not change sign across its bracket."""


class RateTooSmallError(MultistopError, ValueError):
    """Refraction rate plus discount rate is not positive."""


class ValidationFailedError(MultistopError):
    """Raised by the solvers when the model/contract fails validation."""

    def __init__(self, report):
        super().__init__(f"validation failed: {', '.join(report.failures())}")
        self.report = report
