"""Exception and warning types used across the package."""
from __future__ import annotations


class LabError(Exception):
    """Base class for all package errors."""


class InvalidParameter(LabError, ValueError):
    """A parameter violates a documented guard."""


class ExcludedWeight(InvalidParameter):
    """Weight exponent hits the excluded set {jp - 1}."""


class NonIntegrableWeight(LabError):
    """The weight (or weighted integrand) is not integrable near the boundary."""


class TailNotConverged(LabError):
    """Doubling the truncation radius changed an integral beyond tolerance."""


class InsufficientDerivatives(LabError):
    """A derivative order above the available closure was requested."""


class DerivativeOrderLost(InsufficientDerivatives):
    """A product rule cannot supply the requested derivative order."""


class HypothesisViolated(LabError):
    """Inputs violate the hypotheses of the inequality being checked."""


class NoTrace(LabError):
    """Boundary extrapolation did not converge."""


class QuadratureDiverged(LabError):
    """Panel refinement of a convolution integral failed to converge."""


class SectorViolation(InvalidParameter):
    """A complex time lies outside its declared sector."""


class FitRejected(LabError):
    """A log-log fit has too small a coefficient of determination."""


class BranchCut(InvalidParameter):
    """Spectral parameter on the negative real axis."""


class UnboundedSymbol(LabError):
    """A spectral multiplier exceeds its cap on the frequency grid."""


class ContourNotConverged(LabError):
    """Contour quadrature is not stable under refinement."""


class SymbolUnboundedOnContour(LabError):
    """A holomorphic symbol is not bounded on the contour."""


class TimeStepNotConverged(LabError):
    """Time quadrature is not stable under halving."""


class ConfigInvalid(LabError):
    """Configuration file contains an unknown or malformed key."""

    def __init__(self, key: str, message: str = ""):
        super().__init__(f"{key}: {message}" if message else key)
        self.key = key


class MissingCriterion(LabError):
    """Acceptance configs do not cover all criteria."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__("uncovered criteria: " + ", ".join(self.missing))


class AliasWarning(UserWarning):
    """Spectral energy above the frequency truncation exceeds tolerance."""
