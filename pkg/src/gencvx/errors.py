"""Exception types shared across the package."""

from __future__ import annotations


class GencvxError(Exception):
    """Base class for all package errors."""


class ParseError(GencvxError, ValueError):
    """Malformed expression source.

    Attributes:
        offset: byte offset (UTF-8) of the offending token in the source.
        message: human readable description.
        token: text of the offending token ('' at end of input).
    """

    def __init__(self, offset: int, message: str, token: str = ""):
        self.offset = offset
        self.message = message
        self.token = token
        super().__init__(f"{message} at byte {offset} (token {token!r})")


class DomainError(GencvxError, ArithmeticError):
    """Evaluation left the domain of an operation (log, sqrt, division)."""


class QuadratureError(GencvxError, ArithmeticError):
    """Adaptive quadrature did not reach its tolerance within budget."""


class DegenerateSampling(GencvxError, RuntimeError):
    """Too many sample points failed to evaluate."""


class GradientMismatch(GencvxError, ValueError):
    """User supplied gradient disagrees with finite differences of the value."""


class ConfigError(GencvxError, ValueError):
    """Invalid analysis configuration."""
