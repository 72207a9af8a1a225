"""Exception types shared across the package."""

from __future__ import annotations


class Error(Exception):
    """Base class for all package errors."""


class NotSquare(Error, ValueError):
    pass


class NotHermitian(Error, ValueError):
    pass


class DimensionMismatch(Error, ValueError):
    pass


class IndexOutOfRange(Error, IndexError):
    pass


class InvalidDensityMatrix(Error, ValueError):
    pass


class NotNormalized(Error, ValueError):
    pass


class ZeroSupport(Error, ValueError):
    pass


class InvalidSize(Error, ValueError):
    pass


class LengthMismatch(Error, ValueError):
    pass


class TooLarge(Error, ValueError):
    pass


class EmptyGrid(Error, ValueError):
    pass


class NonPositiveBeta(Error, ValueError):
    pass


class BadTarget(Error, ValueError):
    pass


class SlotMismatch(Error, ValueError):
    pass


class BadSplit(Error, ValueError):
    pass


class NonFiniteLoss(Error, ArithmeticError):
    pass


class ShapeMismatch(Error, ValueError):
    pass


class ConfigInvalid(Error, ValueError):
    pass


class CheckpointMismatch(Error, ValueError):
    pass


class DegenerateDenominator(Error, ArithmeticError):
    pass


class ParseError(Error, ValueError):
    pass


class ValidationError(Error, ValueError):
    """Carries every violation found while validating a config."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class IncompleteRecord(Error, ValueError):
    pass
