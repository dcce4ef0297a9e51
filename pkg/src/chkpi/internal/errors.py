"""
The exception hierarchy of the package.
"""
from __future__ import annotations


class ChkpiError(Exception):
    """Base class of the errors raised by the package."""


class NonzeroMeanError(ChkpiError):
    """Raised when the inverse second x-derivative is applied to data with a nonzero x-mean."""


class ParameterError(ChkpiError):
    """Raised when the physical parameters admit no smooth solitary wave (c ≤ 2κ or κ ≤ 0)."""


class ResolutionError(ChkpiError):
    """Raised when a grid cannot resolve the requested profile to the required accuracy."""


class ZeroFrequencyError(ChkpiError):
    """Raised when a transverse frequency of zero is passed where the inverse second x-derivative is needed."""


class ConvergenceError(ChkpiError):
    """Raised when a dense eigensolve fails to converge."""


class NoUnstableModeError(ChkpiError):
    """Raised when no integer multiple of the base frequency lies inside the unstable band."""


class TruncationError(ChkpiError):
    """Raised when a mode stack cannot hold the transverse support of a result."""


class StabilityError(ChkpiError):
    """Raised when a time step exceeds the stability bound of the explicit part of the integrator."""


class BlowupError(ChkpiError):
    """Raised when a simulated field exceeds the configured wave breaking guard."""


class ConstraintError(ChkpiError):
    """Raised when a field violates the zero x-mean constraint on a nonzero transverse mode."""


class InsufficientDataError(ChkpiError):
    """Raised when too few successful runs are available for a fit."""


class HierarchyOrderError(ChkpiError):
    """
    Raised when solving one order of the approximate solution hierarchy fails.

    :ivar order: The order at which the failure occurred.
    """

    def __init__(self, order: int, cause: Exception):
        self.order = order
        self.cause = cause
        super().__init__(f'Order {order} of the hierarchy failed: {type(cause).__name__}: {cause}')
