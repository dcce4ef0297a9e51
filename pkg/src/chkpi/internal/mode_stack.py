"""
Fields with finitely many transverse Fourier modes, u = Σ_{|j|≤K} u_j(x) e^{ijk y}, stored as one row of
x-coefficients per transverse index j.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt
from public import public
from typing_extensions import Self

from chkpi.internal.errors import TruncationError
from chkpi.internal.grid import Grid1D, Grid2D
from chkpi.internal.multiplier import X_DERIVATIVE, X_SECOND_DERIVATIVE
from chkpi.internal.spectral_field import SpectralField, x_forward_transform, x_inverse_transform


@public
class QuadraticForm(StrEnum):
    """The bilinear x-products of the quadratic terms of the equation."""

    GRAD_GRAD = 'grad_grad'
    ID_DXX = 'id_dxx'
    ID_ID = 'id_id'


@public
@dataclass(frozen=True)
class ModeStack:
    """
    A field with transverse modes |j| ≤ K.

    :ivar x_grid: The grid of the x direction.
    :ivar base_frequency: The transverse frequency k of stack index 1.
    :ivar coefficients: The x-coefficients of u_j, shape (2K + 1, Nx), row j + K holding index j.
    """

    x_grid: Grid1D
    base_frequency: float
    coefficients: npt.NDArray[np.complex128]

    @classmethod
    def new(cls, *, x_grid: Grid1D, base_frequency: float, coefficients: npt.ArrayLike) -> Self:
        coefficients = np.asarray(coefficients, dtype=np.complex128)
        if coefficients.ndim != 2 or coefficients.shape[0] % 2 != 1 or coefficients.shape[1] != x_grid.node_count:
            error_message = (f'Stack coefficients must have shape (2K + 1, {x_grid.node_count}), but '
                             f'{coefficients.shape} was given.')
            raise ValueError(error_message)
        return cls(x_grid=x_grid, base_frequency=float(base_frequency), coefficients=coefficients)

    @classmethod
    def zeros(cls, *, x_grid: Grid1D, base_frequency: float, max_index: int) -> Self:
        return cls(x_grid=x_grid, base_frequency=float(base_frequency),
                   coefficients=np.zeros((2 * max_index + 1, x_grid.node_count), dtype=np.complex128))

    @classmethod
    def from_mode(cls, *, x_grid: Grid1D, base_frequency: float, profile: npt.NDArray[np.complex128],
                  max_index: int = 1) -> Self:
        """
        The stack of the real field 2Re(e^{iky}U) = e^{iky}U + e^{−iky}Ū, with entries at j = ±1.

        :param x_grid: The grid of the x direction.
        :param base_frequency: The transverse frequency k.
        :param profile: The complex node values of U.
        :param max_index: The K of the stack.
        :return: The stack.
        """
        stack = cls.zeros(x_grid=x_grid, base_frequency=base_frequency, max_index=max_index)
        stack.coefficients[max_index + 1] = x_forward_transform(profile)
        stack.coefficients[max_index - 1] = x_forward_transform(np.conj(profile))
        return stack

    @property
    def max_index(self) -> int:
        return (self.coefficients.shape[0] - 1) // 2

    @property
    def indices(self) -> npt.NDArray[np.int64]:
        return np.arange(-self.max_index, self.max_index + 1)

    @property
    def transverse_wavenumbers(self) -> npt.NDArray[np.float64]:
        return self.indices * self.base_frequency

    @property
    def profiles(self) -> npt.NDArray[np.complex128]:
        """The complex node values of every u_j."""
        return x_inverse_transform(self.coefficients)

    def entry(self, index: int) -> npt.NDArray[np.complex128]:
        """The x-coefficients of u_j, zero outside the stack."""
        if abs(index) > self.max_index:
            return np.zeros(self.x_grid.node_count, dtype=np.complex128)
        return self.coefficients[index + self.max_index]

    @property
    def support(self) -> npt.NDArray[np.int64]:
        """The indices j with a nonzero u_j."""
        return self.indices[np.any(self.coefficients != 0, axis=1)]

    @property
    def support_radius(self) -> int:
        """max |j| over the support, or −1 for the zero stack."""
        support = self.support
        if support.size == 0:
            return -1
        return int(np.max(np.abs(support)))

    def hermitian_pairing_error(self) -> float:
        """max_j ‖u_{−j} − conj(u_j)‖ over the node values, relative to the largest entry."""
        profiles = self.profiles
        scale = np.max(np.abs(profiles), initial=0.0)
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(profiles[::-1] - np.conj(profiles))) / scale)

    def resized(self, max_index: int) -> Self:
        """
        The same field in a stack with another K.

        :raises TruncationError: If the support does not fit the new K.
        """
        if self.support_radius > max_index:
            error_message = (f'A stack supported up to |j| = {self.support_radius} cannot be held with '
                             f'K = {max_index}.')
            raise TruncationError(error_message)
        resized = ModeStack.zeros(x_grid=self.x_grid, base_frequency=self.base_frequency, max_index=max_index)
        kept = min(max_index, self.max_index)
        resized.coefficients[max_index - kept:max_index + kept + 1] = (
            self.coefficients[self.max_index - kept:self.max_index + kept + 1])
        return resized

    def mode_norm(self, order: float = 0.0) -> float:
        """The norm max_j |u_j|_s, with |·|_s the x-Sobolev norm of order s."""
        weights = (1 + self.x_grid.wavenumbers ** 2) ** order
        squared_norms = self.x_grid.length * np.sum(weights * np.abs(self.coefficients) ** 2, axis=1)
        return float(np.sqrt(np.max(squared_norms)))

    def sobolev_norm(self, order: float = 0.0) -> float:
        """The Sobolev norm of order s of the synthesized field on [−Lx, Lx) × 𝕋."""
        weights = (1 + self.x_grid.wavenumbers[np.newaxis, :] ** 2
                   + self.transverse_wavenumbers[:, np.newaxis] ** 2) ** order
        area = self.x_grid.length * 2 * np.pi / self.base_frequency
        return float(np.sqrt(area * np.sum(weights * np.abs(self.coefficients) ** 2)))

    def synthesize(self, grid: Grid2D) -> SpectralField:
        """
        The real field on a two dimensional grid. Stack index j lands on the grid's transverse mode j·k/k₀.

        :param grid: A grid whose base frequency divides the stack's base frequency.
        :return: The field.
        :raises ValueError: If the grid cannot hold the stack's transverse support.
        """
        ratio = self.base_frequency / grid.base_frequency
        mode_ratio = int(round(ratio))
        if mode_ratio < 1 or not np.isclose(ratio, mode_ratio, rtol=1e-10):
            error_message = (f'The stack base frequency {self.base_frequency} is not a multiple of the grid base '
                             f'frequency {grid.base_frequency}.')
            raise ValueError(error_message)
        if grid.x_grid != self.x_grid:
            error_message = 'The stack and the grid have different x-grids.'
            raise ValueError(error_message)
        coefficients = np.zeros(grid.shape, dtype=np.complex128)
        for index in self.support:
            coefficients[grid.transverse_row(int(index) * mode_ratio)] += self.entry(int(index))
        return SpectralField.from_coefficients(grid=grid, coefficients=coefficients)

    def __add__(self, other: ModeStack) -> ModeStack:
        max_index = max(self.max_index, other.max_index)
        total = self.resized(max_index).coefficients + other.resized(max_index).coefficients
        return ModeStack(x_grid=self.x_grid, base_frequency=self.base_frequency, coefficients=total)

    def __sub__(self, other: ModeStack) -> ModeStack:
        return self + other * -1.0

    def __mul__(self, scale: complex) -> ModeStack:
        return ModeStack(x_grid=self.x_grid, base_frequency=self.base_frequency, coefficients=self.coefficients * scale)

    __rmul__ = __mul__


def x_dealiasing_mask(x_grid: Grid1D) -> npt.NDArray[np.bool_]:
    return np.abs(x_grid.mode_indices) <= x_grid.node_count / 3


def _factor_values(stack: ModeStack, form: QuadraticForm, *, first: bool) -> npt.NDArray[np.complex128]:
    x_grid = stack.x_grid
    if form == QuadraticForm.GRAD_GRAD:
        return x_inverse_transform(X_DERIVATIVE.on_grid(x_grid) * stack.coefficients)
    if form == QuadraticForm.ID_DXX and not first:
        return x_inverse_transform(X_SECOND_DERIVATIVE.on_grid(x_grid) * stack.coefficients)
    return stack.profiles


def convolve_profiles(first: npt.NDArray[np.complex128], second: npt.NDArray[np.complex128]
                      ) -> npt.NDArray[np.complex128]:
    """
    The transverse index convolution out_n = Σ_{j+l=n} a_j b_l of two stacks of node values.

    :param first: Node values, shape (2K₁ + 1, Nx).
    :param second: Node values, shape (2K₂ + 1, Nx).
    :return: Node values, shape (2(K₁ + K₂) + 1, Nx).
    """
    output = np.zeros((first.shape[0] + second.shape[0] - 1, first.shape[1]), dtype=np.complex128)
    for row, first_row in enumerate(first):
        if np.any(first_row != 0):
            output[row:row + second.shape[0]] += first_row * second
    return output


def mode_product(first: ModeStack, second: ModeStack, form: QuadraticForm, *,
                 max_index: int | None = None) -> ModeStack:
    """
    The product of two stacks, out_n = Σ_{j+l=n} form(a_j, b_l), with the x-products 2/3 truncated.

    :param first: The stack a.
    :param second: The stack b.
    :param form: a_x·b_x, a·b_xx or a·b.
    :param max_index: The K of the result. Defaults to the sum of the input K.
    :return: The product stack.
    :raises TruncationError: If the product's support does not fit `max_index`.
    """
    if not np.isclose(first.base_frequency, second.base_frequency, rtol=1e-12) or first.x_grid != second.x_grid:
        error_message = 'Stacks with different base frequencies or x-grids cannot be multiplied.'
        raise ValueError(error_message)
    full_max_index = first.max_index + second.max_index
    if max_index is None:
        max_index = full_max_index
    if first.support_radius < 0 or second.support_radius < 0:
        return ModeStack.zeros(x_grid=first.x_grid, base_frequency=first.base_frequency, max_index=max_index)
    product_radius = first.support_radius + second.support_radius
    if product_radius > max_index:
        error_message = (f'The product of stacks supported up to |j| = {first.support_radius} and '
                         f'|j| = {second.support_radius} needs K ≥ {product_radius}, but K = {max_index} was given.')
        raise TruncationError(error_message)
    values = convolve_profiles(_factor_values(first, form, first=True), _factor_values(second, form, first=False))
    coefficients = x_forward_transform(values) * x_dealiasing_mask(first.x_grid)
    product = ModeStack(x_grid=first.x_grid, base_frequency=first.base_frequency, coefficients=coefficients)
    return product.resized(max_index)
