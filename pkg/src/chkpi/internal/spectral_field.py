"""
Real fields on periodic grids with lazily computed Fourier coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
import numpy.typing as npt
import scipy.fft
from public import public
from typing_extensions import Self

from chkpi.internal.grid import Grid1D, Grid2D

Grid = Union[Grid1D, Grid2D]


def forward_transform(values: npt.NDArray) -> npt.NDArray[np.complex128]:
    """
    Transforms collocation values to coefficients normalized as Fourier series coefficients.

    :param values: The collocation values. Every axis is transformed.
    :return: The coefficients in transform order.
    """
    return scipy.fft.fftn(values) / values.size


def inverse_transform(coefficients: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    """
    Transforms Fourier series coefficients back to (complex) collocation values.

    :param coefficients: The coefficients in transform order.
    :return: The collocation values.
    """
    return scipy.fft.ifftn(coefficients) * coefficients.size


def x_forward_transform(values: npt.NDArray) -> npt.NDArray[np.complex128]:
    """Transforms along the last (x) axis only."""
    return scipy.fft.fft(values, axis=-1) / values.shape[-1]


def x_inverse_transform(coefficients: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
    """Inverse transforms along the last (x) axis only."""
    return scipy.fft.ifft(coefficients, axis=-1) * coefficients.shape[-1]


@public
@dataclass
class SpectralField:
    """
    A real field on a periodic grid. The collocation values are the primary data and the Fourier coefficients are
    computed on first access.

    :ivar grid: The grid the field lives on.
    :ivar values: The real collocation values, indexed `[y, x]` on two dimensional grids.
    """

    grid: Grid
    values: npt.NDArray[np.float64]

    @classmethod
    def new(cls, *, grid: Grid, values: npt.ArrayLike) -> Self:
        """
        Creates a new field.

        :param grid: The grid the field lives on.
        :param values: The real collocation values.
        :return: The field.
        """
        values = np.asarray(values, dtype=np.float64)
        if values.shape != grid.shape:
            error_message = f'Values of shape {values.shape} do not match a grid of shape {grid.shape}.'
            raise ValueError(error_message)
        return cls(grid=grid, values=values)

    @classmethod
    def from_coefficients(cls, *, grid: Grid, coefficients: npt.NDArray[np.complex128]) -> Self:
        """
        Creates a field from Fourier coefficients. Only the Hermitian part of the coefficients is kept, so the
        resulting field is real.

        :param grid: The grid the field lives on.
        :param coefficients: The coefficients in transform order.
        :return: The field.
        """
        values = inverse_transform(coefficients).real
        return cls(grid=grid, values=values)

    @classmethod
    def zeros(cls, grid: Grid) -> Self:
        return cls(grid=grid, values=np.zeros(grid.shape))

    @cached_property
    def coefficients(self) -> npt.NDArray[np.complex128]:
        return forward_transform(self.values)

    @property
    def dimension(self) -> int:
        return self.values.ndim

    def __add__(self, other: SpectralField) -> SpectralField:
        return SpectralField(grid=self.grid, values=self.values + other.values)

    def __sub__(self, other: SpectralField) -> SpectralField:
        return SpectralField(grid=self.grid, values=self.values - other.values)

    def __mul__(self, scale: float) -> SpectralField:
        return SpectralField(grid=self.grid, values=self.values * scale)

    __rmul__ = __mul__
