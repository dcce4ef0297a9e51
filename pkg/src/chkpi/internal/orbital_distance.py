"""
Distances from a two dimensional field to the orbit of the solitary wave under x-translations.
"""
from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt
import scipy.fft
from scipy.optimize import minimize_scalar

from chkpi.internal.spectral_field import SpectralField, x_forward_transform, x_inverse_transform

if TYPE_CHECKING:
    from chkpi.internal.solitary_wave import SolitaryWave

SHIFT_TOLERANCE = 1e-10


def shifted_profile(wave: SolitaryWave, shift: float) -> npt.NDArray[np.float64]:
    """The node values of φ(· − l) on the periodic x-grid, shifted spectrally."""
    phase = np.exp(-1j * wave.grid.odd_wavenumbers * shift)
    return x_inverse_transform(x_forward_transform(wave.profile) * phase).real


def _wrap_shift(shift: float, half_length: float) -> float:
    return float((shift + half_length) % (2 * half_length) - half_length)


def orbital_distance(field: SpectralField, wave: SolitaryWave) -> tuple[float, float]:
    """
    The L² distance inf_l ‖u − φ(· − l)‖ over periodic shifts l. The best grid shift is located by cross correlating the
    transverse mean of u with φ, then refined by a bounded scalar minimization within one grid spacing.

    :param field: The field u, on a grid sharing the wave's x-grid.
    :param wave: The solitary wave.
    :return: The distance and the minimizing shift l*, wrapped into [−Lx, Lx).
    """
    x_grid = wave.grid
    if field.grid.x_grid != x_grid:
        error_message = 'The field must share the x-grid of the solitary wave.'
        raise ValueError(error_message)
    values = field.values if field.dimension == 2 else field.values[np.newaxis, :]
    transverse_mean = np.mean(values, axis=0)
    correlation = scipy.fft.ifft(scipy.fft.fft(transverse_mean) * np.conj(scipy.fft.fft(wave.profile))).real
    coarse_shift = _wrap_shift(int(np.argmax(correlation)) * x_grid.spacing, x_grid.half_length)
    weight = field.grid.quadrature_weight

    def squared_distance(shift: float) -> float:
        return float(weight * np.sum((values - shifted_profile(wave, shift)[np.newaxis, :]) ** 2))

    result = minimize_scalar(squared_distance, bounds=(coarse_shift - x_grid.spacing, coarse_shift + x_grid.spacing),
                             method='bounded', options={'xatol': SHIFT_TOLERANCE})
    shift = min((float(result.x), coarse_shift), key=squared_distance)
    return float(np.sqrt(squared_distance(shift))), _wrap_shift(shift, x_grid.half_length)


def project_offzero_y(field: SpectralField) -> SpectralField:
    """
    Π u = u − (1/a)∫u dy, which removes the transverse mean, so the result has no m = 0 mode.

    :param field: The two dimensional field.
    :return: The projected field.
    """
    coefficients = field.coefficients.copy()
    coefficients[0] = 0
    return SpectralField.from_coefficients(grid=field.grid, coefficients=coefficients)
