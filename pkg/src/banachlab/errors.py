"""Exception hierarchy for the package.

Everything raised on purpose derives from LabError so callers can catch
one type at the CLI boundary.
"""

__all__ = [
    "LabError",
    "ArgumentError",
    "NonSmoothError",
    "ContractionError",
    "InconsistentWitness",
]


class LabError(Exception):
    """Base class for errors raised by banachlab."""


class ArgumentError(LabError, ValueError):
    """A malformed or out-of-contract argument."""


class NonSmoothError(LabError):
    """Raised when a closed-form duality operation is requested at a
    non-smooth point or on a non-smooth space and no canonical selection
    was opted into."""


class ContractionError(LabError):
    """Raised when an operator that must be a contraction is not one."""


class InconsistentWitness(LabError):
    """Two independent oracles for the same question disagreed beyond the
    agreement band.  This is a hard error on purpose: it means a bug, not
    a borderline input."""
