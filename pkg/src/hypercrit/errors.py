"""Exception hierarchy. The CLI maps each class to an exit code."""

from __future__ import annotations


class HypercritError(Exception):
    exit_code = 1


class InvalidInputError(HypercritError, ValueError):
    exit_code = 2


class UnsupportedOperationError(InvalidInputError):
    pass


class InvalidIRSError(InvalidInputError):
    pass


class FiniteMemberError(InvalidInputError):
    """A support member is finite, outside the hypothesis of the growth theorem."""


class NotFoundError(HypercritError, LookupError):
    exit_code = 3

    def __init__(self, message: str, radius: int | None = None):
        super().__init__(message)
        self.radius = radius


class InvariantViolation(HypercritError, AssertionError):
    exit_code = 4
