"""
Operations on spectral fields: multiplier applications, dealiasing, norms and inner products.
"""
from __future__ import annotations

import numpy as np

from chkpi.internal.multiplier import (
    HELMHOLTZ_INVERSE,
    X_ANTIDERIVATIVE,
    X_ANTIDERIVATIVE2,
    X_ANTIDERIVATIVE2_ZEROING,
    X_DERIVATIVE,
    X_SECOND_DERIVATIVE,
    Y_DERIVATIVE,
    Y_SECOND_DERIVATIVE,
    Multiplier,
    dealiasing_mask,
    skew_multiplier,
)
from chkpi.internal.spectral_field import SpectralField


def apply_multiplier(field: SpectralField, multiplier: Multiplier) -> SpectralField:
    """
    Applies a Fourier multiplier to a field. The result is projected back onto real fields.

    :param field: The field.
    :param multiplier: The multiplier.
    :return: The transformed field.
    """
    multiplier.check_zero_mode(field.coefficients, field.grid)
    coefficients = field.coefficients * multiplier.on_grid(field.grid)
    return SpectralField.from_coefficients(grid=field.grid, coefficients=coefficients)


def helmholtz_inverse(field: SpectralField) -> SpectralField:
    """
    Applies (1−∂x²)⁻¹.

    :param field: The field.
    :return: The smoothed field.
    """
    return apply_multiplier(field, HELMHOLTZ_INVERSE)


def apply_J(field: SpectralField, *, epsilon: float = 0.0) -> SpectralField:  # noqa N802
    """
    Applies the skew operator 𝒥 = (1−∂x²)⁻¹∂x, or its regularized version (1−∂x²+εΔ²)⁻¹∂x when `epsilon` is
    positive. The zero x-mode is annihilated.

    :param field: The field.
    :param epsilon: The regularization strength.
    :return: The transformed field.
    """
    return apply_multiplier(field, skew_multiplier(epsilon))


def x_derivative(field: SpectralField) -> SpectralField:
    return apply_multiplier(field, X_DERIVATIVE)


def x_second_derivative(field: SpectralField) -> SpectralField:
    return apply_multiplier(field, X_SECOND_DERIVATIVE)


def x_antiderivative(field: SpectralField) -> SpectralField:
    """
    Applies ∂x⁻¹ on the mean-free modes. The zero x-mode of the output is zero.
    """
    return apply_multiplier(field, X_ANTIDERIVATIVE)


def x_antiderivative2(field: SpectralField, *, zero_nonzero_mean: bool = False) -> SpectralField:
    """
    Applies ∂x⁻², the multiplier −1/ξ². The operator is only defined on data with zero x-mean.

    :param field: The field.
    :param zero_nonzero_mean: Whether to silently drop a nonzero x-mean instead of raising.
    :return: The transformed field, with zero x-mean.
    :raises NonzeroMeanError: If the field has a nonzero x-mean and `zero_nonzero_mean` is false.
    """
    if zero_nonzero_mean:
        return apply_multiplier(field, X_ANTIDERIVATIVE2_ZEROING)
    return apply_multiplier(field, X_ANTIDERIVATIVE2)


def y_derivative(field: SpectralField) -> SpectralField:
    return apply_multiplier(field, Y_DERIVATIVE)


def y_derivative2(field: SpectralField) -> SpectralField:
    return apply_multiplier(field, Y_SECOND_DERIVATIVE)


def dealias(field: SpectralField) -> SpectralField:
    """
    Applies the 2/3 truncation: x-modes with |n| > Nx/3 and, on two dimensional grids, transverse modes with
    |m| > Ny/3 are removed.

    :param field: The field.
    :return: The truncated field.
    """
    coefficients = np.where(dealiasing_mask(field.grid), field.coefficients, 0)
    return SpectralField.from_coefficients(grid=field.grid, coefficients=coefficients)


def sobolev_norm(field: SpectralField, order: float = 0.0) -> float:
    """
    The Sobolev norm (Σ (1+ξ²+η²)^s |ĉ|² · area)^{1/2}. For order 0 this is the L² norm of the field.

    :param field: The field.
    :param order: The Sobolev order s.
    :return: The norm.
    """
    grid = field.grid
    weights = (1 + grid.x_wavenumber_mesh ** 2 + grid.transverse_wavenumber_mesh ** 2) ** order
    squared_norm = grid.area * np.sum(weights * np.abs(field.coefficients) ** 2)
    return float(np.sqrt(squared_norm))


def inner_product(first: SpectralField, second: SpectralField) -> float:
    """
    The L² inner product by trapezoidal quadrature, which is spectrally accurate on periodic grids.
    """
    return float(np.sum(first.values * second.values) * first.grid.quadrature_weight)


def quadrature(field: SpectralField) -> float:
    return float(np.sum(field.values) * field.grid.quadrature_weight)
