"""
Selection and normalization of the most unstable transverse eigenmode for a given base frequency.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from public import public

from chkpi.internal.eigen_analysis import EigenBranch, unstable_eigen
from chkpi.internal.errors import NoUnstableModeError
from chkpi.internal.grid import Grid2D
from chkpi.internal.operator_matrix import LinearizedOperators
from chkpi.internal.solitary_wave import SolitaryWave

logger = logging.getLogger(__name__)

IMAGINARY_GROWTH_WARNING = 1e-8


@public
@dataclass
class UnstableMode:
    """
    The selected unstable eigenmode v⁰ = 2Re(e^{σ₀t}e^{im₀k₀y}U₀).

    :ivar wave: The solitary wave.
    :ivar base_frequency: The base transverse frequency k₀.
    :ivar mode_index: The selected integer m₀.
    :ivar growth_rate: The eigenvalue σ₀.
    :ivar profile: U₀ on the grid nodes, scaled so that ‖v⁰(0)‖ = 1 on ℝ × 𝕋_a.
    :ivar eigen_residual: The relative eigen residual of the selected pair.
    :ivar largest_unstable_index: The largest integer m with mk₀ unstable.
    :ivar candidate_growth_rates: The real growth rate of every unstable candidate m.
    """

    wave: SolitaryWave
    base_frequency: float
    mode_index: int
    growth_rate: complex
    profile: npt.NDArray[np.complex128]
    eigen_residual: float
    largest_unstable_index: int
    candidate_growth_rates: dict[int, float] = field(default_factory=dict)

    @property
    def transverse_frequency(self) -> float:
        return self.mode_index * self.base_frequency

    @property
    def transverse_period(self) -> float:
        return 2 * np.pi / self.base_frequency

    @property
    def real_growth_rate(self) -> float:
        return float(self.growth_rate.real)

    def perturbation_values(self, grid: Grid2D, time: float = 0.0) -> npt.NDArray[np.float64]:
        """
        Evaluates v⁰(t) = 2Re(e^{σ₀t}e^{im₀k₀y}U₀) on a two dimensional grid.

        :param grid: A grid whose base frequency is k₀ and whose x-grid is the wave's grid.
        :param time: The time t.
        :return: The values, indexed `[y, x]`.
        """
        if not np.isclose(grid.base_frequency, self.base_frequency, rtol=1e-12):
            error_message = (f'The grid base frequency {grid.base_frequency} differs from the mode base frequency '
                             f'{self.base_frequency}.')
            raise ValueError(error_message)
        transverse_phase = np.exp(1j * self.transverse_frequency * grid.nodes)[:, np.newaxis]
        return 2 * np.real(np.exp(self.growth_rate * time) * transverse_phase * self.profile[np.newaxis, :])


def normalize_for_torus(profile: npt.NDArray[np.complex128], spacing: float,
                        transverse_period: float) -> npt.NDArray[np.complex128]:
    """
    Scales U so that ‖2Re(e^{imk₀y}U)‖ = 1 on ℝ × 𝕋_a, that is 2a∫|U|² = 1.
    """
    squared_norm = np.sum(np.abs(profile) ** 2) * spacing
    return profile / np.sqrt(2 * transverse_period * squared_norm)


def select_most_unstable(branch: EigenBranch, base_frequency: float, *,
                         growth_tolerance: float = 1e-6) -> UnstableMode:
    """
    Among the integer multiples mk₀ inside the unstable band, selects the one with the largest real growth rate. The
    largest unstable m is recorded alongside.

    :param branch: The scanned branch, which carries the band and the wave.
    :param base_frequency: The base transverse frequency k₀.
    :param growth_tolerance: The real part σ must exceed to count as unstable.
    :return: The normalized unstable mode.
    :raises NoUnstableModeError: If no integer multiple of k₀ is unstable.
    """
    if not base_frequency > 0:
        error_message = f'The base frequency must be positive, but {base_frequency} was given.'
        raise ValueError(error_message)
    if branch.band is None:
        error_message = 'The branch has no unstable band.'
        raise NoUnstableModeError(error_message)
    lower_edge, upper_edge = branch.band
    operators = LinearizedOperators.new(branch.wave)
    candidates = {}
    mode_index = max(1, int(np.floor(lower_edge / base_frequency)))
    while mode_index * base_frequency <= upper_edge:
        eigenpair = unstable_eigen(operators, mode_index * base_frequency, growth_tolerance=growth_tolerance)
        if eigenpair is not None:
            candidates[mode_index] = eigenpair
        mode_index += 1
    if not candidates:
        error_message = (f'No integer multiple of k₀ = {base_frequency} lies in the unstable band '
                         f'({lower_edge:.6f}, {upper_edge:.6f}).')
        raise NoUnstableModeError(error_message)
    selected_index = max(candidates, key=lambda index: candidates[index].growth_rate.real)
    selected = candidates[selected_index]
    if abs(selected.growth_rate.imag) > IMAGINARY_GROWTH_WARNING:
        logger.warning(f'The selected growth rate {selected.growth_rate} is not real. Its real part is used.')
    profile = normalize_for_torus(selected.profile, branch.wave.grid.spacing, 2 * np.pi / base_frequency)
    logger.info(f'Selected m₀ = {selected_index} at k₀ = {base_frequency:.6f} with σ₀ = {selected.growth_rate:.6f}.')
    return UnstableMode(
        wave=branch.wave,
        base_frequency=float(base_frequency),
        mode_index=selected_index,
        growth_rate=selected.growth_rate,
        profile=profile,
        eigen_residual=selected.residual,
        largest_unstable_index=max(candidates),
        candidate_growth_rates={index: eigenpair.growth_rate.real for index, eigenpair in candidates.items()},
    )
