"""
Exception types raised by locinfo.

Everything derives from ValueError so callers can keep catching the
builtin for invalid input.
"""

from typing import Optional


class LocinfoError(ValueError):
    """Base class for locinfo input errors."""


class DimensionMismatchError(LocinfoError):
    pass


class NotHermitianError(LocinfoError):
    pass


class NotAStateError(LocinfoError):
    """Operator is not positive semidefinite or not of unit trace."""


class ParameterRangeError(LocinfoError):
    pass


class MarginalNotMaximallyMixedError(LocinfoError):
    """The A-marginal of the state is not maximally mixed."""


class InvalidMeasurementError(LocinfoError):
    pass


class UnsupportedFamilyError(LocinfoError):
    pass


class InfeasibleProblemError(LocinfoError):
    pass


class StateFileError(LocinfoError):
    """
    State file could not be turned into a valid state.

    Attributes:
        kind: one of "parse", "hermiticity", "positivity", "trace"
    """

    def __init__(self, message: str, kind: str = "parse", path: Optional[str] = None):
        super().__init__(message)
        self.kind = kind
        self.path = path
