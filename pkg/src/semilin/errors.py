"""Exception hierarchy shared across the package."""


class SemilinError(Exception):
    """Base class for all errors raised by semilin."""


class ValidationError(SemilinError, ValueError):
    """A specification or input violates a documented constraint."""


class DomainError(ValidationError):
    """A tabulated function was evaluated outside its table."""


class ContractionError(ValidationError):
    """The model violates the contraction condition |a|*C < 1."""


class PreconditionError(ValidationError):
    """A weight scheme cannot be applied to the given path."""


class DegenerateDenominatorError(SemilinError, ArithmeticError):
    """The weighted denominator sum is numerically zero."""

    def __init__(self, message, magnitude=0.0, tolerance=0.0):
        super().__init__(message)
        self.magnitude = magnitude
        self.tolerance = tolerance
