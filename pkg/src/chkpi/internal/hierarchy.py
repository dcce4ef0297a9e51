"""
The high order approximate unstable solution v^ap = δ(v⁰ + Σ_{k=1}^M δᵏvᵏ).

Matching powers of δ in the perturbation equation gives, for every order k, the forced linear problem

    ∂t vᵏ = 𝒥𝓛vᵏ + Σ_{j+l=k−1} B(vʲ, vˡ),  vᵏ(0) = 0,

with B the truncated bilinear form of the quadratic terms. The orders are integrated as one triangular system with the
same exponential integrator, time step and truncated products as the simulator, so the discrete trajectory of the
simulated perturbation agrees with v^ap order by order in δ.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING, Callable

import numpy as np
import numpy.typing as npt
import pandas as pd
import scipy.interpolate
from public import public

from chkpi.internal.errors import BlowupError, ChkpiError, HierarchyOrderError
from chkpi.internal.mode_stack import ModeStack, QuadraticForm, mode_product
from chkpi.internal.spectral_field import SpectralField, x_forward_transform
from chkpi.internal.time_integration import (
    EtdRk4Coefficients,
    check_time_step,
    default_time_step,
    integrate,
    step_count_for,
)
from chkpi.internal.transverse_flow import TransverseFlow

if TYPE_CHECKING:
    from chkpi.internal.grid import Grid1D, Grid2D
    from chkpi.internal.solitary_wave import SolitaryWave
    from chkpi.internal.unstable_mode import UnstableMode

logger = logging.getLogger(__name__)

MAXIMUM_ORDER = 4
DEFAULT_SAMPLE_STRIDE = 10
GROWTH_FIT_START_FRACTION = 0.5
RATE_TOLERANCE = 0.02
SAMPLE_TIME_TOLERANCE = 1e-9

ForcingTerm = Callable[[float], npt.NDArray[np.complex128]]


@public
@dataclass(frozen=True)
class ForcedModeSolution:
    """
    A sampled solution of ∂t u = 𝒥𝓛(η)u + 𝒥F(t), u(0) = 0.

    :ivar transverse_wavenumber: The transverse wavenumber η.
    :ivar times: The sample times.
    :ivar coefficients: The x-coefficients of u at the sample times.
    :ivar derivatives: The right-hand side at the sample times.
    """

    transverse_wavenumber: float
    times: npt.NDArray[np.float64]
    coefficients: npt.NDArray[np.complex128]
    derivatives: npt.NDArray[np.complex128]


def solve_forced_mode(
        wave: SolitaryWave,
        transverse_wavenumber: float,
        forcing: ForcingTerm,
        final_time: float,
        *,
        time_step: float | None = None,
        epsilon: float = 0.0,
        sample_stride: int = 1,
) -> ForcedModeSolution:
    """
    Solves one forced linear mode problem with zero initial data. At η = 0 the transverse term of 𝒥𝓛(η) vanishes
    exactly, and the zero x-mode is never excited since 𝒥 removes it.

    :param wave: The solitary wave.
    :param transverse_wavenumber: The transverse wavenumber η = jm₀k₀ of the mode.
    :param forcing: The node values of F as a function of time.
    :param final_time: The time to integrate to.
    :param time_step: The step size. Defaults to 0.5 over the explicit stiffness bound.
    :param epsilon: The regularization strength of 𝒥^ε.
    :param sample_stride: The number of steps between recorded samples.
    :return: The sampled solution.
    :raises StabilityError: If the step size exceeds the stability bound of the explicit part.
    """
    flow = TransverseFlow.new(wave=wave, transverse_wavenumbers=[transverse_wavenumber], epsilon=epsilon)
    stiffness_bound = flow.stiffness_bound()
    if time_step is None:
        time_step = default_time_step(stiffness_bound)
    check_time_step(time_step, stiffness_bound)
    coefficients = EtdRk4Coefficients.new(linear_symbol=flow.linear_symbol[0], time_step=time_step)
    forcing_symbol = flow.x_mask * flow.skew_symbol[0]

    def explicit_part(state: npt.NDArray[np.complex128], time: float) -> npt.NDArray[np.complex128]:
        forcing_coefficients = x_forward_transform(np.asarray(forcing(time), dtype=np.complex128))
        return flow.remainder(state[np.newaxis, :])[0] + forcing_symbol * forcing_coefficients

    initial_state = np.zeros(wave.grid.node_count, dtype=np.complex128)
    samples = list(integrate(coefficients, initial_state, step_count_for(final_time, time_step), explicit_part,
                             sample_stride=sample_stride))
    return ForcedModeSolution(
        transverse_wavenumber=float(transverse_wavenumber),
        times=np.array([sample.time for sample in samples]),
        coefficients=np.stack([sample.state for sample in samples]),
        derivatives=np.stack([sample.derivative for sample in samples]),
    )


@public
@dataclass(frozen=True)
class HierarchyResult:
    """
    The sampled orders v⁰, …, vᴹ of the approximate solution, each held as a mode stack with K = M + 1.

    :ivar mode: The unstable mode v⁰ grows from.
    :ivar order: The order M.
    :ivar times: The sample times.
    :ivar coefficients: The stack coefficients, shape (samples, M + 1, 2K + 1, Nx).
    :ivar derivatives: The time derivatives of the stacks at the samples, same shape.
    :ivar time_step: The integrator step size.
    :ivar epsilon: The regularization strength of 𝒥^ε.
    :ivar sobolev_order: The Sobolev order s of the monitored norms.
    :ivar norms: The norms max_j |vᵏ_j|_s, shape (samples, M + 1).
    :ivar growth_rates: The exponential rate of each order fitted over the second half of the run.
    :ivar bound_constants: For each order, max_t |vᵏ(t)| e^{−(k+1)Re σ₀ t}.
    """

    mode: UnstableMode
    order: int
    times: npt.NDArray[np.float64]
    coefficients: npt.NDArray[np.complex128]
    derivatives: npt.NDArray[np.complex128]
    time_step: float
    epsilon: float
    sobolev_order: float
    norms: npt.NDArray[np.float64]
    growth_rates: npt.NDArray[np.float64]
    bound_constants: npt.NDArray[np.float64]

    @property
    def max_index(self) -> int:
        return self.order + 1

    @property
    def base_frequency(self) -> float:
        """The transverse frequency m₀k₀ of stack index 1."""
        return self.mode.transverse_frequency

    @property
    def x_grid(self) -> Grid1D:
        return self.mode.wave.grid

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def working_sobolev_orders(self) -> list[float]:
        """The regularity s − k each order is accounted in."""
        return [self.sobolev_order - order for order in range(self.order + 1)]

    @cached_property
    def flow(self) -> TransverseFlow:
        return hierarchy_flow(self.mode, self.max_index, self.epsilon)

    def stack(self, order: int, sample_index: int) -> ModeStack:
        return ModeStack(x_grid=self.x_grid, base_frequency=self.base_frequency,
                         coefficients=self.coefficients[sample_index, order])

    def support_radius(self, order: int) -> int:
        """The largest |j| with a nonzero entry of the given order at any sample."""
        nonzero_rows = np.any(self.coefficients[:, order] != 0, axis=(0, 2))
        indices = np.arange(-self.max_index, self.max_index + 1)[nonzero_rows]
        if indices.size == 0:
            return -1
        return int(np.max(np.abs(indices)))

    def sample_index(self, time: float) -> int:
        """
        The index of the sample at the given time.

        :raises ValueError: If no sample lies at the time.
        """
        index = int(np.argmin(np.abs(self.times - time)))
        if abs(self.times[index] - time) > SAMPLE_TIME_TOLERANCE * max(1.0, abs(time)):
            error_message = f'No hierarchy sample lies at t = {time}. The nearest one is at {self.times[index]}.'
            raise ValueError(error_message)
        return index

    def to_data_frame(self) -> pd.DataFrame:
        data_frame = pd.DataFrame({'t': self.times})
        for order in range(self.order + 1):
            data_frame[f'order_{order}'] = self.norms[:, order]
        return data_frame


def hierarchy_flow(mode: UnstableMode, max_index: int, epsilon: float = 0.0) -> TransverseFlow:
    """The flow acting on the rows j = −K, …, K of stacks with base frequency m₀k₀."""
    transverse_wavenumbers = np.arange(-max_index, max_index + 1) * mode.transverse_frequency
    return TransverseFlow.new(wave=mode.wave, transverse_wavenumbers=transverse_wavenumbers, epsilon=epsilon)


def quadratic_term(flow: TransverseFlow, first: ModeStack, second: ModeStack, max_index: int
                   ) -> npt.NDArray[np.complex128]:
    """The coefficients of B(a, b) on a stack with the given K. The flow must act on the rows of that stack."""
    product = mode_product(first, second, QuadraticForm.ID_ID, max_index=max_index)
    gradient_product = mode_product(first, second, QuadraticForm.GRAD_GRAD, max_index=max_index)
    return flow.combine_products(product.coefficients, gradient_product.coefficients)


def _order_source(flow: TransverseFlow, stacks: list[ModeStack], order: int) -> npt.NDArray[np.complex128]:
    """Σ_{j+l=k−1} B(vʲ, vˡ), summed in a fixed order with each unordered pair once."""
    max_index = stacks[0].max_index
    source = np.zeros_like(stacks[0].coefficients)
    for first_order in range((order - 1) // 2 + 1):
        second_order = order - 1 - first_order
        pair_weight = 1 if first_order == second_order else 2
        source += pair_weight * quadratic_term(flow, stacks[first_order], stacks[second_order], max_index)
    return source


def build_hierarchy(
        mode: UnstableMode,
        order: int,
        final_time: float,
        *,
        time_step: float | None = None,
        sample_stride: int = DEFAULT_SAMPLE_STRIDE,
        epsilon: float = 0.0,
        sobolev_order: float = 0.0,
) -> HierarchyResult:
    """
    Integrates the orders v⁰, …, vᴹ. The order zero starts from the eigenmode stack with entries U₀ at j = 1 and
    conj(U₀) at j = −1 and follows the linear flow, and every higher order starts from zero.

    :param mode: The selected unstable mode.
    :param order: The order M, from 0 to 4.
    :param final_time: The time to integrate to.
    :param time_step: The step size. Defaults to 0.5 over the explicit stiffness bound.
    :param sample_stride: The number of steps between recorded samples.
    :param epsilon: The regularization strength of 𝒥^ε.
    :param sobolev_order: The Sobolev order s of the monitored norms.
    :return: The hierarchy.
    :raises HierarchyOrderError: If an order cannot be solved, with the order attached.
    """
    if not 0 <= order <= MAXIMUM_ORDER:
        error_message = f'The hierarchy order must be between 0 and {MAXIMUM_ORDER}, but {order} was given.'
        raise ValueError(error_message)
    max_index = order + 1
    flow = hierarchy_flow(mode, max_index, epsilon)
    stiffness_bound = flow.stiffness_bound()
    if time_step is None:
        time_step = default_time_step(stiffness_bound)
    try:
        check_time_step(time_step, stiffness_bound)
    except ChkpiError as error:
        raise HierarchyOrderError(0, error) from error
    coefficients = EtdRk4Coefficients.new(linear_symbol=flow.linear_symbol, time_step=time_step)
    x_grid = mode.wave.grid
    base_frequency = mode.transverse_frequency

    def explicit_part(state: npt.NDArray[np.complex128], time: float) -> npt.NDArray[np.complex128]:
        tendency = flow.remainder(state)
        stacks = [ModeStack(x_grid=x_grid, base_frequency=base_frequency, coefficients=state[order_index])
                  for order_index in range(order + 1)]
        for order_index in range(1, order + 1):
            try:
                tendency[order_index] += _order_source(flow, stacks, order_index)
            except ChkpiError as error:
                raise HierarchyOrderError(order_index, error) from error
        return tendency

    def check_finite(state: npt.NDArray[np.complex128], step_index: int) -> npt.NDArray[np.complex128]:
        for order_index in range(order + 1):
            if not np.all(np.isfinite(state[order_index])):
                error = BlowupError(f'Non-finite values appeared after {step_index} steps.')
                raise HierarchyOrderError(order_index, error)
        return state

    initial_state = np.zeros((order + 1, 2 * max_index + 1, x_grid.node_count), dtype=np.complex128)
    initial_state[0] = ModeStack.from_mode(x_grid=x_grid, base_frequency=base_frequency, profile=mode.profile,
                                           max_index=max_index).coefficients
    step_count = step_count_for(final_time, time_step)
    samples = list(integrate(coefficients, initial_state, step_count, explicit_part, sample_stride=sample_stride,
                             after_step=check_finite))
    times = np.array([sample.time for sample in samples])
    stack_coefficients = np.stack([sample.state for sample in samples])
    norms = np.array([[ModeStack(x_grid=x_grid, base_frequency=base_frequency, coefficients=sample.state[index]
                                 ).mode_norm(sobolev_order) for index in range(order + 1)] for sample in samples])
    growth_rates = fit_growth_rates(times, norms)
    bound_constants = fit_bound_constants(times, norms, mode.real_growth_rate)
    logger.info(f'Integrated the hierarchy of order {order} to t = {times[-1]:.3f} in {step_count} steps.')
    for order_index, growth_rate in enumerate(growth_rates):
        predicted_rate = (order_index + 1) * mode.real_growth_rate
        logger.debug(f'Order {order_index} grows at {growth_rate:.6f} against {predicted_rate:.6f}.')
        if growth_rate > predicted_rate * (1 + RATE_TOLERANCE):
            logger.warning(f'Order {order_index} grows at {growth_rate:.6f}, faster than (k + 1)Re σ₀ = '
                           f'{predicted_rate:.6f}.')
    return HierarchyResult(
        mode=mode,
        order=order,
        times=times,
        coefficients=stack_coefficients,
        derivatives=np.stack([sample.derivative for sample in samples]),
        time_step=float(time_step),
        epsilon=float(epsilon),
        sobolev_order=float(sobolev_order),
        norms=norms,
        growth_rates=growth_rates,
        bound_constants=bound_constants,
    )


def fit_growth_rates(times: npt.NDArray[np.float64], norms: npt.NDArray[np.float64],
                     start_fraction: float = GROWTH_FIT_START_FRACTION) -> npt.NDArray[np.float64]:
    """
    Fits log |vᵏ(t)| linearly over t ∈ [start_fraction·T, T] for every order.

    :return: The slopes, NaN where fewer than two positive norms lie in the window.
    """
    window = times >= start_fraction * times[-1]
    growth_rates = []
    for order_norms in norms.T:
        usable = window & (order_norms > 0)
        if np.count_nonzero(usable) < 2:
            growth_rates.append(np.nan)
            continue
        slope, _ = np.polyfit(times[usable], np.log(order_norms[usable]), deg=1)
        growth_rates.append(slope)
    return np.array(growth_rates)


def fit_bound_constants(times: npt.NDArray[np.float64], norms: npt.NDArray[np.float64],
                        growth_rate: float) -> npt.NDArray[np.float64]:
    rates = growth_rate * np.arange(1, norms.shape[1] + 1)
    return np.max(norms * np.exp(-np.outer(times, rates)), axis=0)


def _weighted_stack(result: HierarchyResult, amplitude: float, order_coefficients: npt.NDArray[np.complex128],
                    order: int | None) -> ModeStack:
    if order is None:
        order = result.order
    weights = amplitude ** np.arange(1, order + 2)
    coefficients = np.tensordot(weights, order_coefficients[:order + 1], axes=1)
    return ModeStack(x_grid=result.x_grid, base_frequency=result.base_frequency, coefficients=coefficients)


def vap_stack(result: HierarchyResult, amplitude: float, sample_index: int, *, order: int | None = None) -> ModeStack:
    """The stack of δ(v⁰ + Σ_{k=1}^{M} δᵏvᵏ) at a sample, optionally truncated at a lower order."""
    return _weighted_stack(result, amplitude, result.coefficients[sample_index], order)


def _interpolated_coefficients(result: HierarchyResult, time: float) -> npt.NDArray[np.complex128]:
    upper_index = int(np.searchsorted(result.times, time))
    lower_index = upper_index - 1
    spline = scipy.interpolate.CubicHermiteSpline(result.times[lower_index:upper_index + 1],
                                                  result.coefficients[lower_index:upper_index + 1],
                                                  result.derivatives[lower_index:upper_index + 1], axis=0)
    return spline(time)


def assemble_vap(result: HierarchyResult, amplitude: float, time: float, grid: Grid2D, *,
                 order: int | None = None) -> SpectralField:
    """
    Synthesizes v^ap(t) = δ(v⁰ + Σ_{k=1}^{M} δᵏvᵏ) on a two dimensional grid. Between samples the orders are
    interpolated with cubic Hermite polynomials built from the stored derivatives.

    :param result: The hierarchy.
    :param amplitude: The amplitude δ > 0.
    :param time: A time within the stored horizon.
    :param grid: A grid whose base frequency divides m₀k₀.
    :param order: The highest order included. Defaults to M.
    :return: The real field v^ap(t).
    """
    if not amplitude > 0:
        error_message = f'The amplitude must be positive, but {amplitude} was given.'
        raise ValueError(error_message)
    if not -SAMPLE_TIME_TOLERANCE <= time <= result.final_time * (1 + SAMPLE_TIME_TOLERANCE):
        error_message = f'The time {time} lies outside the stored horizon [0, {result.final_time}].'
        raise ValueError(error_message)
    try:
        order_coefficients = result.coefficients[result.sample_index(time)]
    except ValueError:
        order_coefficients = _interpolated_coefficients(result, time)
    return _weighted_stack(result, amplitude, order_coefficients, order).synthesize(grid)


def approximation_residual(result: HierarchyResult, amplitude: float, time: float, *,
                           order: int | None = None) -> ModeStack:
    """
    The residual G = −∂t v^ap + 𝒥𝓛v^ap + B(v^ap, v^ap) of the approximate solution at a sample time, with ∂t v^ap
    taken from the stored derivatives. It is supported on |j| ≤ 2(M + 1).

    :param result: The hierarchy.
    :param amplitude: The amplitude δ > 0.
    :param time: A sample time.
    :param order: The highest order included in v^ap. Defaults to M. The orders are triangular, so a lower order
        residual is the one of the lower order hierarchy.
    :return: The residual stack.
    """
    if order is None:
        order = result.order
    sample_index = result.sample_index(time)
    max_index = result.max_index
    approximation = vap_stack(result, amplitude, sample_index, order=order)
    weights = amplitude ** np.arange(1, order + 2)
    tendency = np.tensordot(weights, result.derivatives[sample_index, :order + 1], axes=1)
    linear_part = ModeStack(x_grid=result.x_grid, base_frequency=result.base_frequency,
                            coefficients=result.flow.linear_action(approximation.coefficients) - tendency)
    product_flow = hierarchy_flow(result.mode, 2 * max_index, result.epsilon)
    quadratic_part = quadratic_term(product_flow, approximation, approximation, 2 * max_index)
    return ModeStack(x_grid=result.x_grid, base_frequency=result.base_frequency,
                     coefficients=linear_part.resized(2 * max_index).coefficients + quadratic_part)


def export_hierarchy_csv(result: HierarchyResult, path: Path) -> Path:
    """
    Writes the norms of every order with the columns t, order_0, …, order_M.

    :param result: The hierarchy.
    :param path: The CSV path.
    :return: The path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    result.to_data_frame().to_csv(path, index=False)
    return path
