"""Shared exception types; everything is a ValueError/RuntimeError subclass."""
from __future__ import annotations


class DomainError(ValueError):
    """An argument is outside the physically meaningful range."""


class DimensionError(ValueError):
    """Array shape disagrees with the active radar profile."""


class ConfigError(ValueError):
    """Inconsistent or unusable parameter combination."""


class ScenarioError(ValueError):
    """Scenario file failed validation."""


class InsufficientDataError(ValueError):
    """Not enough samples/points to compute a statistic."""


class DiscontinuityError(ValueError):
    """Frame sequence has a timestamp gap where contiguity is required."""


class NumericalError(RuntimeError):
    """A numerical invariant (e.g. covariance positive semi-definiteness) broke."""


class FrameLogError(ValueError):
    """Malformed frame log; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset
