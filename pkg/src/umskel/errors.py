"""Exception hierarchy shared by all umskel modules.

Exit-code mapping used by the CLI: usage problems are argparse's business
(exit 2); everything below maps to exit 1 with a machine-readable payload.
"""

from __future__ import annotations


class UmskelError(Exception):
    """Base class for all errors raised by this package."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = dict(details)

    def to_jsonable(self) -> dict:
        return {
            "type": type(self).__name__,
            "message": self.message,
            "details": self.details,
        }


class StructuralError(UmskelError):
    """Malformed container: non-square matrix, ragged rows, bad tree node."""


class MetricValueError(UmskelError, ValueError):
    """NaN, infinite, or negative entries where finite nonnegative reals are required."""


class ArgumentError(UmskelError, ValueError):
    """An argument is outside its documented domain (negative radius, eps <= 0, ...)."""


class CapacityError(UmskelError):
    """Instance exceeds an exact-computation cap; a labeled approximation may exist."""


class ContractError(UmskelError):
    """A documented precondition fails on concrete data; details name the witness."""


class SubmeasureContractError(ContractError):
    """Input claimed to be a submeasure violates monotonicity/subadditivity."""


class InternalInvariantError(UmskelError):
    """A condition the construction guarantees was observed to fail (a bug)."""
