"""Exception types shared across the package.

Every error that a caller is expected to branch on gets its own class so that
CLI exit codes and retry logic can dispatch on type rather than message text.
"""


class CubicShaError(Exception):
    """Base class for all package errors."""


class NotSplitPrime(CubicShaError):
    """p is not a prime congruent to 1 mod 3."""


class NotPrimary(CubicShaError):
    """Eisenstein element fails the primary normalization (== 2 mod 3)."""


class OverflowBudget(CubicShaError):
    """An exact integer result left the signed 128-bit budget."""


class NotCubeFree(CubicShaError):
    """Twist parameter divisible by a prime cube."""


class NotBadPrime(CubicShaError):
    """Local data requested at a prime of good reduction."""


class BadPrime(CubicShaError):
    """Good-reduction coefficient requested at a bad prime."""


class CutoffTooSmall(CubicShaError):
    """Certified series tail exceeds the requested tolerance."""


class OddSign(CubicShaError):
    """Central value requested for a twist with root number -1."""


class AmbiguousSign(CubicShaError):
    """Functional-equation test failed to separate the two root numbers."""


class NotNearInteger(CubicShaError):
    """Analytic order does not certify to an integer at current precision."""


class NotASquare(CubicShaError):
    """Certified analytic order is an integer but not a perfect square."""


class RangeNotCovered(CubicShaError):
    """Statistic requested beyond the range covered by the store."""


class EmptySubset(CubicShaError):
    """Statistic requested over an empty qualifying subset."""


class InsufficientData(CubicShaError):
    """Regression fit lacks usable points or fails the residual bound."""


class DomainError(CubicShaError):
    """Argument outside the mathematical domain of the operation."""


class NotSquareFree(CubicShaError):
    """Class-number parameter divisible by a prime square."""


class RoundingMarginFailed(CubicShaError):
    """Class number failed the 0.25 rounding margin after escalation."""


class ManifestCorrupt(CubicShaError):
    """Scan manifest or shard digest mismatch."""


class DivisionByZero(CubicShaError):
    """Ratio statistic with an empty denominator count."""
