"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: validation problems exit 2,
numerical failures exit 3, verification failures exit 4.
"""


class LagsolError(Exception):
    """Base class for all package errors."""


class ValidationError(LagsolError):
    """Inputs violate a documented precondition (bad shapes, signs, ranges)."""


class InvalidTarget(ValidationError):
    """An angle target lies outside the attainable region."""


class CaseMismatch(ValidationError):
    """Data does not satisfy the constraints of the requested special case."""


class NumericalError(LagsolError):
    """A numerical routine failed to deliver the requested accuracy."""


class DomainEscape(NumericalError):
    """The integrated solution reached the boundary of the admissible u-band.

    Carries the parameter value at which the radius product degenerated.
    """

    def __init__(self, s, message=None):
        self.s = float(s)
        super().__init__(message or f"solution left the admissible domain near s = {self.s:.6g}")


class ToleranceFailure(NumericalError):
    """Step size underflow or exhausted step budget before reaching the target."""


class NonConvergence(NumericalError):
    """An iterative solver stalled before meeting its tolerance."""


class VerificationError(LagsolError):
    """A recomputed residual exceeded its acceptance threshold."""

    def __init__(self, invariant, value, threshold):
        self.invariant = invariant
        self.value = float(value)
        self.threshold = float(threshold)
        super().__init__(
            f"verification failed: {invariant} = {self.value:.3e} exceeds {self.threshold:.1e}"
        )
