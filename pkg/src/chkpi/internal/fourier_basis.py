"""
A real orthonormal trigonometric basis of the collocation space, in which the linearized operators are assembled
as dense matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt
from public import public
from typing_extensions import Self

from chkpi.internal.grid import Grid1D


@public
@dataclass(frozen=True)
class FourierBasis:
    """
    The real orthonormal basis {cos(ξ_n x), sin(ξ_n x) : 0 < n < Nx/2} of node vectors, optionally extended by the
    constant vector. The Nyquist mode is excluded, so derivatives act exactly on the span.

    Columns are ordered as the constant (when included), then the cosines, then the sines.

    :ivar grid: The grid.
    :ivar includes_mean: Whether the constant vector is part of the basis.
    """

    grid: Grid1D
    includes_mean: bool = False

    @classmethod
    def new(cls, *, grid: Grid1D, includes_mean: bool = False) -> Self:
        return cls(grid=grid, includes_mean=includes_mean)

    @property
    def mode_count(self) -> int:
        return self.grid.node_count // 2 - 1

    @property
    def dimension(self) -> int:
        return 2 * self.mode_count + int(self.includes_mean)

    @property
    def mean_offset(self) -> int:
        return int(self.includes_mean)

    @cached_property
    def positive_wavenumbers(self) -> npt.NDArray[np.float64]:
        return np.pi * np.arange(1, self.mode_count + 1) / self.grid.half_length

    @cached_property
    def wavenumbers(self) -> npt.NDArray[np.float64]:
        """The wavenumber of each column, zero for the constant column."""
        columns = [self.positive_wavenumbers, self.positive_wavenumbers]
        if self.includes_mean:
            columns.insert(0, np.zeros(1))
        return np.concatenate(columns)

    @cached_property
    def matrix(self) -> npt.NDArray[np.float64]:
        """The node values of the basis vectors as columns, orthonormal in the Euclidean product."""
        node_count = self.grid.node_count
        phases = np.outer(self.grid.nodes, self.positive_wavenumbers)
        scale = np.sqrt(2 / node_count)
        columns = [scale * np.cos(phases), scale * np.sin(phases)]
        if self.includes_mean:
            columns.insert(0, np.full((node_count, 1), 1 / np.sqrt(node_count)))
        return np.hstack(columns)

    @cached_property
    def derivative_matrix(self) -> npt.NDArray[np.float64]:
        """The exact matrix of ∂x in the basis."""
        derivative = np.zeros((self.dimension, self.dimension))
        cosine_indexes = self.mean_offset + np.arange(self.mode_count)
        sine_indexes = cosine_indexes + self.mode_count
        derivative[sine_indexes, cosine_indexes] = -self.positive_wavenumbers
        derivative[cosine_indexes, sine_indexes] = self.positive_wavenumbers
        return derivative

    def multiplication_matrix(self, values: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        """
        The Galerkin matrix of multiplication by a function sampled on the nodes.

        :param values: The node values of the multiplying function.
        :return: The symmetric matrix Wᵀ diag(values) W.
        """
        return self.matrix.T @ (values[:, np.newaxis] * self.matrix)

    def analyze(self, values: npt.NDArray) -> npt.NDArray:
        """Projects node values onto the basis coordinates."""
        return self.matrix.T @ values

    def synthesize(self, coordinates: npt.NDArray) -> npt.NDArray:
        """Maps basis coordinates to node values."""
        return self.matrix @ coordinates
