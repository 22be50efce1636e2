"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class BalanceLawError(Exception):
    """Base class for every error raised by the package."""


class EvaluationError(BalanceLawError):
    """A user supplied function returned a non-finite value."""

    def __init__(self, message: str, where: float | None = None):
        super().__init__(message)
        self.where = where


class DomainError(BalanceLawError):
    """Arguments lie outside the domain an operation is defined on."""


class NotDifferentiableError(BalanceLawError):
    """The flow is continuous but its derivative in s is not defined here."""


class BlowUpError(BalanceLawError):
    """A trajectory or a numerical scheme escaped to infinity."""

    def __init__(self, message: str, time: float | None = None, step: int | None = None):
        super().__init__(message)
        self.time = time
        self.step = step


class ConditionHError(BalanceLawError):
    """The surface/flux convexity condition fails with mixed sign."""


class NotInFanError(BalanceLawError):
    """A rarefaction root was requested outside the fan region."""


class ScenarioError(BalanceLawError):
    """A scenario document could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(BalanceLawError):
    """A numerical scheme configuration is inconsistent."""


class FormatError(BalanceLawError):
    """A solution file does not have the expected layout."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
