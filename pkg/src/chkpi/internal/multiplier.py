"""
Fourier multipliers: the symbols of the skew operator 𝒥 = (1−∂x²)⁻¹∂x, the Helmholtz inverse, the x-derivatives
and antiderivatives, and the transverse second derivative.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import StrEnum
from typing import TYPE_CHECKING, Callable

import numpy as np
from public import public

from chkpi.internal.errors import NonzeroMeanError
from chkpi.internal.grid import Grid2D

if TYPE_CHECKING:
    import numpy.typing as npt

    from chkpi.internal.spectral_field import Grid

NONZERO_MEAN_TOLERANCE = 1e-12


@public
class ZeroModePolicy(StrEnum):
    """How a multiplier treats the zero x-mode."""

    ZERO = 'zero'
    PASS = 'pass'
    REJECT = 'reject'


@public
@dataclass(frozen=True)
class Multiplier:
    """
    A Fourier multiplier acting on the coefficients of a field.

    :ivar name: A short name used in messages.
    :ivar symbol: The symbol as a function of the x-wavenumber ξ and the transverse wavenumber η.
    :ivar zero_mode_policy: The treatment of the zero x-mode.
    :ivar odd: Whether the symbol is odd in ξ. Odd symbols vanish at the Nyquist mode.
    """

    name: str
    symbol: Callable[[npt.NDArray, npt.NDArray], npt.NDArray]
    zero_mode_policy: ZeroModePolicy
    odd: bool = False

    def evaluate(self, x_wavenumbers: npt.NDArray, transverse_wavenumbers: npt.NDArray) -> npt.NDArray:
        """
        Evaluates the symbol on (broadcastable) wavenumber arrays. Zero x-wavenumber entries are handled by the zero
        mode policy, and for odd symbols the Nyquist entry must already be zeroed in `x_wavenumbers`.

        :param x_wavenumbers: The x-wavenumbers.
        :param transverse_wavenumbers: The transverse wavenumbers.
        :return: The symbol values.
        """
        x_wavenumbers, transverse_wavenumbers = np.broadcast_arrays(x_wavenumbers, transverse_wavenumbers)
        with np.errstate(divide='ignore', invalid='ignore'):
            values = np.asarray(self.symbol(x_wavenumbers, transverse_wavenumbers), dtype=np.complex128)
        zero_mode = x_wavenumbers == 0
        if self.odd or self.zero_mode_policy != ZeroModePolicy.PASS:
            values = np.where(zero_mode, 0, values)
        return values

    def on_grid(self, grid: Grid) -> npt.NDArray[np.complex128]:
        """
        The symbol evaluated on the wavenumbers of a grid, in transform order.

        :param grid: The grid.
        :return: The symbol array, broadcastable against the grid's coefficient arrays.
        """
        if self.odd:
            x_wavenumbers = grid.odd_x_wavenumber_mesh
        else:
            x_wavenumbers = grid.x_wavenumber_mesh
        return self.evaluate(x_wavenumbers, grid.transverse_wavenumber_mesh)

    def check_zero_mode(self, coefficients: npt.NDArray[np.complex128], grid: Grid):
        """
        Raises if a rejecting multiplier is applied to data with a nonzero x-mean on some transverse mode.

        :param coefficients: The coefficients the multiplier is about to act on.
        :param grid: The grid of the coefficients.
        """
        if self.zero_mode_policy != ZeroModePolicy.REJECT:
            return
        scale = np.max(np.abs(coefficients), initial=0.0)
        if scale == 0:
            return
        zero_mode_amplitude = np.max(np.abs(coefficients[..., grid.x_grid.mode_indices == 0]))
        if zero_mode_amplitude > NONZERO_MEAN_TOLERANCE * scale:
            error_message = (f'{self.name} requires zero x-mean data, but the zero x-mode has amplitude '
                             f'{zero_mode_amplitude:.3e} (relative {zero_mode_amplitude / scale:.3e}).')
            raise NonzeroMeanError(error_message)


def helmholtz_inverse_symbol(xi, eta):
    return 1 / (1 + xi ** 2)


def skew_symbol(xi, eta, epsilon: float = 0.0):
    """The symbol of 𝒥^ε = (1−∂x²+εΔ²)⁻¹∂x, which is 𝒥 for ε = 0."""
    return 1j * xi / (1 + xi ** 2 + epsilon * (xi ** 2 + eta ** 2) ** 2)


def skew_second_derivative_symbol(xi, eta, epsilon: float = 0.0):
    """
    The symbol of 𝒥^ε∂x. For ε = 0 it is 1/(1+ξ²) − 1, so that 𝒥∂x(g) = −g + (1−∂x²)⁻¹g is a bounded operator.
    """
    if epsilon == 0:
        return 1 / (1 + xi ** 2) - 1
    return -xi ** 2 / (1 + xi ** 2 + epsilon * (xi ** 2 + eta ** 2) ** 2)


def x_derivative_symbol(xi, eta):
    return 1j * xi


def x_second_derivative_symbol(xi, eta):
    return -xi ** 2


def x_antiderivative_symbol(xi, eta):
    return 1 / (1j * xi)


def x_antiderivative2_symbol(xi, eta):
    return -1 / xi ** 2


def y_derivative_symbol(xi, eta):
    return 1j * eta


def y_derivative2_symbol(xi, eta):
    return -eta ** 2


def constant_coefficient_symbol(xi, eta, speed: float, kappa: float, epsilon: float = 0.0):
    """
    The symbol of 𝒥^ε(−c∂x² + (c−2κ) − ∂x⁻²∂y²), the part of 𝒥𝓛 left when the wave profile vanishes. It is
    purely imaginary, so the corresponding flow is dispersive.
    """
    numerator = speed * xi ** 4 + (speed - 2 * kappa) * xi ** 2 + eta ** 2
    return 1j * numerator / (xi * (1 + xi ** 2 + epsilon * (xi ** 2 + eta ** 2) ** 2))


HELMHOLTZ_INVERSE = Multiplier('helmholtz_inverse', helmholtz_inverse_symbol, ZeroModePolicy.PASS)
SKEW = Multiplier('apply_J', skew_symbol, ZeroModePolicy.ZERO, odd=True)
X_DERIVATIVE = Multiplier('x_derivative', x_derivative_symbol, ZeroModePolicy.ZERO, odd=True)
X_SECOND_DERIVATIVE = Multiplier('x_second_derivative', x_second_derivative_symbol, ZeroModePolicy.PASS)
X_ANTIDERIVATIVE = Multiplier('x_antiderivative', x_antiderivative_symbol, ZeroModePolicy.ZERO, odd=True)
X_ANTIDERIVATIVE2 = Multiplier('x_antiderivative2', x_antiderivative2_symbol, ZeroModePolicy.REJECT)
X_ANTIDERIVATIVE2_ZEROING = Multiplier('x_antiderivative2', x_antiderivative2_symbol, ZeroModePolicy.ZERO)
Y_DERIVATIVE = Multiplier('y_derivative', y_derivative_symbol, ZeroModePolicy.PASS)
Y_SECOND_DERIVATIVE = Multiplier('y_derivative2', y_derivative2_symbol, ZeroModePolicy.PASS)


def skew_multiplier(epsilon: float = 0.0) -> Multiplier:
    """
    The multiplier of the (optionally regularized) skew operator.

    :param epsilon: The regularization strength ε ≥ 0.
    :return: The multiplier.
    """
    if epsilon == 0:
        return SKEW
    return Multiplier('apply_J_regularized', functools.partial(skew_symbol, epsilon=epsilon), ZeroModePolicy.ZERO,
                      odd=True)


def skew_second_derivative_multiplier(epsilon: float = 0.0) -> Multiplier:
    return Multiplier('apply_J_x_derivative', functools.partial(skew_second_derivative_symbol, epsilon=epsilon),
                      ZeroModePolicy.PASS)


def constant_coefficient_multiplier(speed: float, kappa: float, epsilon: float = 0.0) -> Multiplier:
    return Multiplier('constant_coefficient_linear_part',
                      functools.partial(constant_coefficient_symbol, speed=speed, kappa=kappa, epsilon=epsilon),
                      ZeroModePolicy.ZERO, odd=True)


def dealiasing_mask(grid: Grid) -> npt.NDArray[np.bool_]:
    """
    The 2/3 truncation mask of a grid: true for the x-modes |n| ≤ Nx/3 and transverse modes |m| ≤ Ny/3 that survive.

    :param grid: The grid.
    :return: The boolean mask, broadcastable against the grid's coefficient arrays.
    """
    x_mask = np.abs(grid.x_mode_index_mesh) <= grid.x_grid.node_count / 3
    if isinstance(grid, Grid2D):
        transverse_mask = np.abs(grid.transverse_mode_index_mesh) <= grid.node_count / 3
        return x_mask & transverse_mask
    return x_mask
