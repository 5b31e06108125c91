"""Exception taxonomy shared by all orbittail modules."""

from __future__ import annotations

__all__ = [
    "OrbittailError",
    "DomainError",
    "QuadratureFailure",
    "UnsupportedKind",
    "NoConvergence",
    "BranchLoss",
    "CaseMismatch",
    "DivergentIntegral",
    "AmbiguousProfile",
    "PrecisionExhausted",
    "UnstableDrift",
]


class OrbittailError(Exception):
    """Base class for every error raised by this package."""


class DomainError(OrbittailError, ValueError):
    """Input violates a documented precondition (bad parameter, unstable load,
    evaluation point outside the function's domain)."""


class QuadratureFailure(OrbittailError):
    """An adaptive integrator could not reach the requested tolerance."""


class UnsupportedKind(OrbittailError):
    """The requested quantity is undefined for this service-time kind."""


class NoConvergence(OrbittailError):
    """An iterative solver exhausted its iteration budget."""


class BranchLoss(OrbittailError):
    """A continuation step jumped off the principal branch of the kernel root."""


class CaseMismatch(OrbittailError):
    """An expansion was requested for a regime the profile does not have."""


class DivergentIntegral(OrbittailError):
    """The integral diverges at the requested endpoint (pole regime)."""


class AmbiguousProfile(OrbittailError):
    """Two candidate dominant singularities tie within tolerance; the
    asymptotic regime cannot be classified reliably."""


class PrecisionExhausted(OrbittailError):
    """The coefficient oracle's error bound exceeds the coefficients
    themselves at the requested truncation order.

    Carries ``first_unusable_n`` when known.
    """

    def __init__(self, message: str, first_unusable_n: int | None = None):
        super().__init__(message)
        self.first_unusable_n = first_unusable_n


class UnstableDrift(OrbittailError):
    """The simulated orbit grew past the runaway threshold; the parameters
    are likely unstable (diagnostic, not a proof)."""
