"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class KckfError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(KckfError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateStateError(KckfError, ArithmeticError):
    """A quaternion collapsed to (near) zero norm."""


class CovarianceDegenerateError(KckfError, ArithmeticError):
    """A state covariance lost positive definiteness, even after jitter."""


class InnovationDegenerateError(KckfError, ArithmeticError):
    """The innovation covariance could not be factorized."""


class DatasetError(KckfError, ValueError):
    """A dataset file is malformed.

    ``line`` is 1-based and counts the header; ``column`` is the header name
    of the offending cell when one applies.
    """

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
