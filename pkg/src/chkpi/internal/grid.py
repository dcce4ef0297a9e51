"""
Periodic collocation grids for the x-line and the transverse torus.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt
import scipy.fft
from public import public
from typing_extensions import Self

DECAY_HALF_LENGTH_FACTOR = 40.0


@public
@dataclass(frozen=True)
class Grid1D:
    """
    A uniform periodic grid on [-Lx, Lx) standing in for the x-line.

    :ivar half_length: The half length Lx of the periodic interval.
    :ivar node_count: The number of collocation nodes Nx, a power of two.
    """

    half_length: float
    node_count: int

    @classmethod
    def new(cls, *, half_length: float, node_count: int) -> Self:
        """
        Creates a new one dimensional grid.

        :param half_length: The half length Lx of the periodic interval.
        :param node_count: The number of collocation nodes Nx. Must be a power of two of at least 8.
        :return: The grid.
        """
        if node_count < 8 or node_count & (node_count - 1) != 0:
            error_message = f'The node count must be a power of two of at least 8, but {node_count} was given.'
            raise ValueError(error_message)
        if not half_length > 0:
            error_message = f'The half length must be positive, but {half_length} was given.'
            raise ValueError(error_message)
        return cls(half_length=float(half_length), node_count=int(node_count))

    @classmethod
    def for_decay_rate(cls, *, decay_rate: float, node_count: int) -> Self:
        """
        Creates a grid whose half length is `40 / decay_rate`, long enough for an exponentially decaying profile with
        the given rate to reach round off level at the boundary.

        :param decay_rate: The exponential decay rate of the profile.
        :param node_count: The number of collocation nodes.
        :return: The grid.
        """
        return cls.new(half_length=DECAY_HALF_LENGTH_FACTOR / decay_rate, node_count=node_count)

    @property
    def spacing(self) -> float:
        return 2 * self.half_length / self.node_count

    @property
    def length(self) -> float:
        return 2 * self.half_length

    @cached_property
    def nodes(self) -> npt.NDArray[np.float64]:
        return -self.half_length + self.spacing * np.arange(self.node_count)

    @cached_property
    def mode_indices(self) -> npt.NDArray[np.int64]:
        """The integer mode indices n in transform order, covering [-Nx/2, Nx/2)."""
        return np.rint(scipy.fft.fftfreq(self.node_count, d=1 / self.node_count)).astype(np.int64)

    @cached_property
    def wavenumbers(self) -> npt.NDArray[np.float64]:
        """The wavenumbers ξ_n = πn/Lx in transform order."""
        return np.pi * self.mode_indices / self.half_length

    @cached_property
    def odd_wavenumbers(self) -> npt.NDArray[np.float64]:
        """The wavenumbers with the Nyquist entry set to zero, for use in odd symbols."""
        wavenumbers = self.wavenumbers.copy()
        wavenumbers[self.node_count // 2] = 0.0
        return wavenumbers

    @property
    def maximum_wavenumber(self) -> float:
        return np.pi * (self.node_count // 2) / self.half_length

    @property
    def area(self) -> float:
        return self.length

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.node_count,)

    @property
    def x_grid(self) -> Grid1D:
        return self

    @property
    def x_wavenumber_mesh(self) -> npt.NDArray[np.float64]:
        return self.wavenumbers

    @property
    def odd_x_wavenumber_mesh(self) -> npt.NDArray[np.float64]:
        return self.odd_wavenumbers

    @property
    def transverse_wavenumber_mesh(self) -> npt.NDArray[np.float64]:
        return np.zeros(1)

    @property
    def x_mode_index_mesh(self) -> npt.NDArray[np.int64]:
        return self.mode_indices

    @property
    def transverse_mode_index_mesh(self) -> npt.NDArray[np.int64]:
        return np.zeros(1, dtype=np.int64)

    @property
    def quadrature_weight(self) -> float:
        return self.spacing


@public
@dataclass(frozen=True)
class Grid2D:
    """
    A periodic grid on [-Lx, Lx) × 𝕋_a with transverse period a = 2π/k₀. Arrays on this grid are indexed `[y, x]`.

    :ivar x_grid: The grid of the x direction.
    :ivar base_frequency: The base transverse frequency k₀.
    :ivar node_count: The number of transverse nodes Ny.
    """

    x_grid: Grid1D
    base_frequency: float
    node_count: int

    @classmethod
    def new(
            cls,
            *,
            x_grid: Grid1D,
            base_frequency: float,
            node_count: int,
            maximum_resolved_mode: int | None = None,
    ) -> Self:
        """
        Creates a new two dimensional grid.

        :param x_grid: The grid of the x direction.
        :param base_frequency: The base transverse frequency k₀.
        :param node_count: The number of transverse nodes Ny. Must be even.
        :param maximum_resolved_mode: The largest transverse mode index the grid is expected to carry. When given,
            Ny must be at least four times this value.
        :return: The grid.
        """
        if node_count < 2 or node_count % 2 != 0:
            error_message = f'The transverse node count must be even, but {node_count} was given.'
            raise ValueError(error_message)
        if maximum_resolved_mode is not None and node_count < 4 * maximum_resolved_mode:
            error_message = (f'The transverse node count {node_count} cannot resolve mode {maximum_resolved_mode}. '
                             f'At least {4 * maximum_resolved_mode} nodes are needed.')
            raise ValueError(error_message)
        if not base_frequency > 0:
            error_message = f'The base frequency must be positive, but {base_frequency} was given.'
            raise ValueError(error_message)
        return cls(x_grid=x_grid, base_frequency=float(base_frequency), node_count=int(node_count))

    @property
    def period(self) -> float:
        return 2 * np.pi / self.base_frequency

    @property
    def spacing(self) -> float:
        return self.period / self.node_count

    @cached_property
    def nodes(self) -> npt.NDArray[np.float64]:
        return self.spacing * np.arange(self.node_count)

    @cached_property
    def mode_indices(self) -> npt.NDArray[np.int64]:
        return np.rint(scipy.fft.fftfreq(self.node_count, d=1 / self.node_count)).astype(np.int64)

    @cached_property
    def wavenumbers(self) -> npt.NDArray[np.float64]:
        """The transverse wavenumbers η_m = m·k₀ in transform order."""
        return self.mode_indices * self.base_frequency

    @property
    def area(self) -> float:
        return self.x_grid.length * self.period

    @property
    def shape(self) -> tuple[int, ...]:
        return self.node_count, self.x_grid.node_count

    @property
    def x_wavenumber_mesh(self) -> npt.NDArray[np.float64]:
        return self.x_grid.wavenumbers[np.newaxis, :]

    @property
    def odd_x_wavenumber_mesh(self) -> npt.NDArray[np.float64]:
        return self.x_grid.odd_wavenumbers[np.newaxis, :]

    @property
    def transverse_wavenumber_mesh(self) -> npt.NDArray[np.float64]:
        return self.wavenumbers[:, np.newaxis]

    @property
    def x_mode_index_mesh(self) -> npt.NDArray[np.int64]:
        return self.x_grid.mode_indices[np.newaxis, :]

    @property
    def transverse_mode_index_mesh(self) -> npt.NDArray[np.int64]:
        return self.mode_indices[:, np.newaxis]

    @property
    def quadrature_weight(self) -> float:
        return self.x_grid.spacing * self.spacing

    def transverse_row(self, mode_index: int) -> int:
        """
        The row of a transform ordered coefficient array holding the given transverse mode index.

        :param mode_index: The transverse mode index m.
        :return: The row index.
        """
        if abs(mode_index) >= self.node_count // 2:
            error_message = f'Transverse mode {mode_index} is not representable with {self.node_count} nodes.'
            raise ValueError(error_message)
        return mode_index % self.node_count
