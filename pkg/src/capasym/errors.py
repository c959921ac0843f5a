"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class CapasymError(Exception):
    """Base class for library errors."""


class DomainError(CapasymError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularPointError(CapasymError):
    """The integrator could not make progress near the singular point u = 0."""

    def __init__(self, message: str, s: float):
        super().__init__(f"{message} (s = {s!r})")
        self.s = s


class DivergenceError(CapasymError):
    """A series or recursion produced a non-finite value."""

    def __init__(self, message: str, m: int | None = None):
        super().__init__(message if m is None else f"{message} (m = {m})")
        self.m = m


class InsufficientHorizonError(CapasymError):
    """The trajectory is too short for the requested estimate."""


class ConfigurationError(CapasymError, ValueError):
    """Invalid run or study configuration."""
