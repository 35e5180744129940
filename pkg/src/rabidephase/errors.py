"""Exception hierarchy shared by the solvers and the scenario runner."""


class RabiDephaseError(Exception):
    """Base class for all package errors."""


class DomainError(RabiDephaseError, ValueError):
    """Invalid physical parameter (non-positive frequency, negative rate, NaN)."""


class TruncationError(RabiDephaseError):
    """Fock truncation is too small for the requested state or evolution.

    ``tail`` holds the offending population mass when it is known.
    """

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class StepFailureError(RabiDephaseError):
    """The adaptive integrator could not advance (step size underflow)."""


class SizeError(RabiDephaseError):
    """Dense superoperator would exceed the configured memory cap."""


class ShapeMismatchError(RabiDephaseError, ValueError):
    """Two states or series do not share a truncation or time grid."""


class InsufficientPointsError(RabiDephaseError, ValueError):
    """Too few samples for a fit window."""


class ConfigError(RabiDephaseError, ValueError):
    """Malformed or inconsistent scenario configuration."""
