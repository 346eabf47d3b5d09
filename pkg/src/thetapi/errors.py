"""Exception types shared across the package."""

from __future__ import annotations

__all__ = ["ThetapiError", "ValidationError", "BudgetExhausted", "InternalCheckError"]


class ThetapiError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(ThetapiError, ValueError):
    """Invalid input: malformed data, violated preconditions, mismatched objects."""


class BudgetExhausted(ThetapiError):
    """A bounded computation ran out of its configured budget."""


class InternalCheckError(ThetapiError):
    """A self-check that should never fail did fail; indicates a bug."""
