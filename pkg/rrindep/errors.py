"""
Exception hierarchy for rrindep
"""
from typing import Optional


class RRIndepError(ValueError):
    """Base class for every error raised by the library."""


class DimensionMismatchError(RRIndepError):
    pass


class NonFiniteError(RRIndepError):
    pass


class SizeMismatchError(RRIndepError):
    pass


class InvalidPermutationError(RRIndepError):
    pass


class SampleTooSmallError(RRIndepError):
    pass


class InvalidParameterError(RRIndepError):
    pass


class ConfigError(RRIndepError):
    pass


class DegenerateSampleError(RRIndepError):
    """
    Raised when one marginal carries no information (constant distances,
    zero median distance, ...).

    Args:
        side: "X" or "Y", the marginal that is degenerate
        message: human readable detail
    """

    def __init__(self, side: str, message: Optional[str] = None):
        self.side = side
        super().__init__(message or f"Degenerate sample on the {side} side")


class ReplicateFailureError(RRIndepError):
    """Raised when a power-study column fails on every replicate of a cell."""
