"""Exception hierarchy.

Every error raised by the library derives from :class:`GSBVPError`. The CLI
maps the three families below onto its exit codes.
"""


class GSBVPError(Exception):
    """Base class for all library errors."""


class ValidationError(GSBVPError):
    """Malformed input: wrong shapes, broken invariants, bad schema."""


class NotElliptic(GSBVPError):
    """Strong ellipticity is a precondition and does not hold."""

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class NumericalError(GSBVPError):
    """Divergence, loss of convergence, or another numerical breakdown."""


# validation family
class NotHermitian(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class ZeroCovector(ValidationError):
    pass


class OrderTooHigh(ValidationError):
    pass


class IsotropyRequired(ValidationError):
    pass


class BranchCut(ValidationError):
    pass


class UnsupportedModel(ValidationError):
    pass


class NormalizationFailure(ValidationError):
    pass


class ClaimViolated(ValidationError):
    pass


class NoClosedForm(ValidationError):
    pass


class GridTooCoarse(ValidationError):
    pass


class CutoffTooSmall(ValidationError):
    pass


class FitIllConditioned(ValidationError):
    pass


class InvalidSetup(ValidationError):
    """A BoundarySetup failed validate_setup where validity is required."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


# numerical family
class ConvergenceFailure(NumericalError):
    pass


class DomainError(NumericalError):
    pass


class QuadratureDivergence(NumericalError):
    pass


class ResolventPole(NumericalError):
    pass


class NonellipticDivergence(NumericalError):
    pass


class InstabilityDetected(NumericalError):
    pass


# alternative spelling accepted for compatibility
NoneellipticDivergence = NonellipticDivergence
