"""Exception taxonomy shared across the library.

The CLI maps these onto its exit-code contract: configuration problems
exit 1, delay-assumption violations exit 2, numeric failures exit 3 and
file/container problems exit 4.
"""

from __future__ import annotations


class DelayPredError(Exception):
    """Base class for all library errors."""


class ConfigError(DelayPredError):
    """Malformed or inconsistent configuration input (exit code 1)."""


class AssumptionViolation(DelayPredError):
    """A delay fails the positivity/invertibility assumptions (exit code 2)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericError(DelayPredError):
    """Numeric failure during computation (exit code 3)."""


class BracketNotFound(NumericError):
    """A root bracket could not be established within the search bounds."""


class NearSingularDenominator(NumericError):
    """|1 - D'(t+psi)| fell below 1e-9 in the horizon ODE right-hand side."""


class GridMismatch(NumericError):
    """Two series were combined whose grids are not nested/aligned."""


class NormTooLarge(NumericError):
    """Matrix-exponential argument norm above the supported range."""


class NotHurwitz(NumericError):
    """A closed-loop matrix expected to be Hurwitz has an unstable eigenvalue."""


class DegenerateTrace(NumericError):
    """Too few usable points for a decay fit."""


class RejectionLimitExceeded(NumericError):
    """Delay-parameter rejection sampling exhausted its attempt budget."""


class HistoryUnderflow(NumericError):
    """A history lookup preceded the buffered interval."""


class LengthMismatch(NumericError):
    """An input vector does not match the operator's grid resolution."""


class ContainerFormatError(DelayPredError):
    """Unreadable or invalid tensor-container file (exit code 4)."""


class BadMagic(ContainerFormatError):
    """File does not start with the container magic bytes."""


class VersionMismatch(ContainerFormatError):
    """Container format version not supported by this reader."""


class ShapeMismatch(ContainerFormatError):
    """A tensor's shape disagrees with the declared architecture."""


class NonFiniteWeight(ContainerFormatError):
    """A loaded tensor contains NaN/Inf or degenerate normalization stats."""
