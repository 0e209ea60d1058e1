"""Exception hierarchy.

Everything raised on bad input derives from ``ValidationError`` (the CLI maps
it to exit code 1).  ``InvariantViolation`` is reserved for internal
consistency checks that should never fire; the CLI maps it to exit code 2.
"""


class ThermoError(Exception):
    """Base class for all package errors."""


class ValidationError(ThermoError, ValueError):
    """Input does not satisfy a type or operation precondition."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class InvalidProbability(ValidationError):
    pass


class DivergentSurprise(ValidationError):
    pass


class EmptySupport(ValidationError):
    pass


class SpaceMismatch(ValidationError):
    pass


class SizeMismatch(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class UnknownRegister(ValidationError):
    pass


class NotEnvironment(ValidationError):
    pass


class MergeStateError(ValidationError):
    pass


class ZeroBranch(ValidationError):
    pass


class PartitionMismatch(ValidationError):
    pass


class InvariantViolation(ThermoError, AssertionError):
    """A conservation law or identity failed beyond tolerance (a bug)."""
