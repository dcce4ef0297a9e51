"""
Periodic grids, spectral fields and Fourier multipliers public interface.
"""
from chkpi.internal.grid import Grid1D, Grid2D
from chkpi.internal.multiplier import Multiplier, ZeroModePolicy, dealiasing_mask
from chkpi.internal.spectral_field import SpectralField
from chkpi.internal.spectral_operations import (
    apply_J,
    apply_multiplier,
    dealias,
    helmholtz_inverse,
    inner_product,
    quadrature,
    sobolev_norm,
    x_antiderivative,
    x_derivative,
    x_second_derivative,
    y_derivative,
    y_derivative2,
)

__all__ = [
    'apply_J',
    'apply_multiplier',
    'dealias',
    'dealiasing_mask',
    'Grid1D',
    'Grid2D',
    'helmholtz_inverse',
    'inner_product',
    'Multiplier',
    'quadrature',
    'sobolev_norm',
    'SpectralField',
    'x_antiderivative',
    'x_derivative',
    'x_second_derivative',
    'y_derivative',
    'y_derivative2',
    'ZeroModePolicy',
]
