"""
Time stepping of the two dimensional equation on [−Lx, Lx) × 𝕋, either for the full field u in the frame moving with
the wave or for the perturbation v = u − φ.

Both forms share the constant coefficient part A∞, advanced exactly by the exponential integrator, and the truncated
bilinear form B of the quadratic terms:

    moving frame:  ∂t u = A∞u + B(u, u),
    perturbation:  ∂t v = A∞v + 2B(φ, v) + B(v, v).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from enum import StrEnum
from functools import cached_property
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
import numpy.typing as npt
import pandas as pd
from public import public
from typing_extensions import Self

from chkpi.internal.errors import BlowupError, ConstraintError, StabilityError
from chkpi.internal.grid import Grid1D, Grid2D
from chkpi.internal.multiplier import dealiasing_mask
from chkpi.internal.spectral_field import SpectralField, forward_transform, inverse_transform
from chkpi.internal.spectral_operations import sobolev_norm
from chkpi.internal.time_integration import (
    STABILITY_LIMIT,
    EtdRk4Coefficients,
    check_time_step,
    default_time_step,
    integrate,
    step_count_for,
)
from chkpi.internal.transverse_flow import TransverseFlow, explicit_stiffness_bound

if TYPE_CHECKING:
    from collections.abc import Iterator

    from chkpi.internal.solitary_wave import SolitaryWave

logger = logging.getLogger(__name__)

CONSTRAINT_TOLERANCE = 1e-10
BOUNDARY_TOLERANCE = 1e-10
BLOWUP_SLOPE_FACTOR = 50.0
ERROR_NORM_ORDERS = (0, 1, 2)
STRIDE_OVER_WHOLE_RUN = 2 ** 62


@public
class FieldForm(StrEnum):
    """Which field a simulation state holds."""

    MOVING_FRAME = 'moving_frame'
    PERTURBATION = 'perturbation'


@public
@dataclass(frozen=True)
class SimState:
    """
    A state of a simulation.

    :ivar time: The time t.
    :ivar field: The full field u in the moving frame, or the perturbation v = u − φ.
    :ivar speed: The frame speed c.
    :ivar step_count: The number of steps taken to reach the state.
    :ivar form: Which field `field` holds.
    """

    time: float
    field: SpectralField
    speed: float
    step_count: int = 0
    form: FieldForm = FieldForm.PERTURBATION

    @property
    def grid(self) -> Grid2D:
        return self.field.grid


@public
@dataclass(frozen=True)
class InvariantValues:
    hamiltonian: float
    impulse: float


@public
@dataclass
class InvariantTrace:
    """
    The conserved quantities sampled along a run.

    :ivar times: The sample times.
    :ivar hamiltonians: The values of 𝓗.
    :ivar impulses: The values of 𝒬.
    :ivar boundary_amplitude: The largest |u − φ| seen on the two outermost x-columns.
    """

    times: list[float] = field(default_factory=list)
    hamiltonians: list[float] = field(default_factory=list)
    impulses: list[float] = field(default_factory=list)
    boundary_amplitude: float = 0.0

    def append(self, time: float, values: InvariantValues):
        if not (np.isfinite(values.hamiltonian) and np.isfinite(values.impulse)):
            error_message = f'Non-finite invariants at t = {time}.'
            raise BlowupError(error_message)
        self.times.append(float(time))
        self.hamiltonians.append(values.hamiltonian)
        self.impulses.append(values.impulse)

    def relative_drifts(self) -> tuple[float, float]:
        """The largest relative deviations of 𝓗 and 𝒬 from their initial values."""
        hamiltonians = np.array(self.hamiltonians)
        impulses = np.array(self.impulses)
        return (float(np.max(np.abs(hamiltonians - hamiltonians[0])) / abs(hamiltonians[0])),
                float(np.max(np.abs(impulses - impulses[0])) / abs(impulses[0])))

    def to_data_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t': self.times, 'H': self.hamiltonians, 'Q': self.impulses})


@public
@dataclass(frozen=True)
class ErrorDiagnostics:
    """
    The error field w = u − φ − v^ap of a simulated state.

    :ivar time: The time t.
    :ivar field: The error field w.
    :ivar norms: ‖w‖_s for s = 0, 1, 2.
    :ivar bound_ratio: ‖w‖₀ / (δ^{M+2}e^{(M+2)Re σ₀ t}), when the amplitude, order and growth rate are given.
    """

    time: float
    field: SpectralField
    norms: dict[int, float]
    bound_ratio: float | None = None


@public
@dataclass
class Simulator:
    """
    Steps the equation about a solitary wave on a two dimensional grid.

    :ivar wave: The solitary wave.
    :ivar grid: The grid, whose x-grid is the wave's grid.
    :ivar flow: The flow about the wave, with one row per transverse mode of the grid.
    :ivar time_step: The default step size.
    :ivar blowup_slope: The largest accepted max |u_x|.
    :ivar boundary_amplitude: The largest |u − φ| seen so far on the two outermost x-columns.
    """

    wave: SolitaryWave
    grid: Grid2D
    flow: TransverseFlow
    time_step: float
    blowup_slope: float
    boundary_amplitude: float = 0.0
    _step_coefficients: dict[float, EtdRk4Coefficients] = field(default_factory=dict, repr=False)

    @classmethod
    def new(
            cls,
            *,
            wave: SolitaryWave,
            grid: Grid2D,
            time_step: float | None = None,
            epsilon: float = 0.0,
            blowup_slope: float | None = None,
    ) -> Self:
        """
        Creates a simulator.

        :param wave: The solitary wave.
        :param grid: The grid. Its x-grid must be the wave's grid.
        :param time_step: The step size. Defaults to 0.5 over the explicit stiffness bound about the wave.
        :param epsilon: The regularization strength of 𝒥^ε.
        :param blowup_slope: The wave breaking guard on max |u_x|. Defaults to 50(c − 2κ).
        :return: The simulator.
        :raises StabilityError: If the step size exceeds the stability bound about the wave.
        """
        if grid.x_grid != wave.grid:
            error_message = 'The simulation grid must share the x-grid of the solitary wave.'
            raise ValueError(error_message)
        flow = TransverseFlow.new(wave=wave, transverse_wavenumbers=grid.wavenumbers, epsilon=epsilon)
        stiffness_bound = flow.stiffness_bound()
        if time_step is None:
            time_step = default_time_step(stiffness_bound)
        check_time_step(time_step, stiffness_bound)
        if blowup_slope is None:
            blowup_slope = BLOWUP_SLOPE_FACTOR * wave.amplitude
        return cls(wave=wave, grid=grid, flow=flow, time_step=float(time_step), blowup_slope=float(blowup_slope))

    def fork(self) -> Self:
        """A simulator with the same setup and a fresh boundary monitor, safe to step alongside this one."""
        return replace(self, boundary_amplitude=0.0, _step_coefficients=dict(self._step_coefficients))

    @property
    def epsilon(self) -> float:
        return self.flow.epsilon

    @cached_property
    def dealiasing_mask(self) -> npt.NDArray[np.bool_]:
        return dealiasing_mask(self.grid)

    @cached_property
    def transverse_mask(self) -> npt.NDArray[np.bool_]:
        return np.abs(self.grid.transverse_mode_index_mesh) <= self.grid.node_count / 3

    @cached_property
    def wave_field(self) -> SpectralField:
        """φ on the two dimensional grid."""
        return SpectralField(grid=self.grid, values=np.broadcast_to(self.wave.profile, self.grid.shape).copy())

    def step_coefficients(self, time_step: float) -> EtdRk4Coefficients:
        if time_step not in self._step_coefficients:
            self._step_coefficients[time_step] = EtdRk4Coefficients.new(linear_symbol=self.flow.linear_symbol,
                                                                        time_step=time_step)
        return self._step_coefficients[time_step]

    def initial_state(self, perturbation: SpectralField | None = None, *,
                      form: FieldForm = FieldForm.PERTURBATION) -> SimState:
        """
        The state φ + v at t = 0, with the zero x-mean of the nonzero transverse modes enforced.

        :param perturbation: The initial perturbation v. Defaults to zero.
        :param form: The form of the returned state.
        :return: The state.
        """
        if perturbation is None:
            perturbation = SpectralField.zeros(self.grid)
        coefficients = self.project_constraint(perturbation.coefficients)
        if form == FieldForm.MOVING_FRAME:
            coefficients = coefficients + self.wave_field.coefficients
        return self._state(0.0, coefficients, 0, form)

    def _state(self, time: float, coefficients: npt.NDArray[np.complex128], step_count: int,
               form: FieldForm) -> SimState:
        return SimState(time=float(time), field=SpectralField.from_coefficients(grid=self.grid,
                                                                               coefficients=coefficients),
                        speed=self.wave.speed, step_count=step_count, form=form)

    def project_constraint(self, coefficients: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
        """Zeroes the x-mean of every transverse mode m ≠ 0."""
        projected = coefficients.copy()
        projected[1:, 0] = 0
        return projected

    def check_constraint(self, coefficients: npt.NDArray[np.complex128]):
        """
        :raises ConstraintError: If a transverse mode m ≠ 0 has an x-mean above 1e−10.
        """
        violation = float(np.max(np.abs(coefficients[1:, 0]), initial=0.0))
        if violation > CONSTRAINT_TOLERANCE:
            error_message = (f'A nonzero transverse mode has x-mean {violation:.3e}, so ∂x⁻²∂y² is undefined. '
                             f'Project the field first.')
            raise ConstraintError(error_message)

    def quadratic(self, first: npt.NDArray[np.complex128],
                  second: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
        """The coefficients of B(a, b) for the coefficients of two real fields."""
        first_values = inverse_transform(first).real
        second_values = inverse_transform(second).real
        first_derivative = inverse_transform(self.flow.derivative_symbol * first).real
        second_derivative = inverse_transform(self.flow.derivative_symbol * second).real
        product = self.dealiasing_mask * forward_transform(first_values * second_values)
        gradient_product = self.dealiasing_mask * forward_transform(first_derivative * second_derivative)
        return self.flow.combine_products(product, gradient_product)

    def wave_remainder(self, coefficients: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
        """2B(φ, v). The wave has no transverse modes, so only the transverse truncation is added to the rows."""
        return self.transverse_mask * self.flow.remainder(coefficients)

    def _moving_frame_explicit(self, coefficients: npt.NDArray[np.complex128],
                               time: float = 0.0) -> npt.NDArray[np.complex128]:
        return self.quadratic(coefficients, coefficients)

    def _perturbation_explicit(self, coefficients: npt.NDArray[np.complex128],
                               time: float = 0.0) -> npt.NDArray[np.complex128]:
        return self.wave_remainder(coefficients) + self.quadratic(coefficients, coefficients)

    def _explicit_part(self, form: FieldForm):
        if form == FieldForm.MOVING_FRAME:
            return self._moving_frame_explicit
        return self._perturbation_explicit

    def total_coefficients(self, state: SimState) -> npt.NDArray[np.complex128]:
        if state.form == FieldForm.MOVING_FRAME:
            return state.field.coefficients
        return state.field.coefficients + self.wave_field.coefficients

    def perturbation_coefficients(self, state: SimState) -> npt.NDArray[np.complex128]:
        if state.form == FieldForm.PERTURBATION:
            return state.field.coefficients
        return state.field.coefficients - self.wave_field.coefficients

    def rhs_moving_frame(self, state: SimState) -> SpectralField:
        """
        The tendency A∞u + B(u, u) of the full field.

        :raises ConstraintError: If the state violates the zero x-mean constraint.
        """
        coefficients = self.total_coefficients(state)
        self.check_constraint(coefficients)
        tendency = self.flow.linear_symbol * coefficients + self._moving_frame_explicit(coefficients)
        return SpectralField.from_coefficients(grid=self.grid, coefficients=tendency)

    def rhs_perturbation(self, state: SimState) -> SpectralField:
        """
        The tendency 𝒥𝓛v + B(v, v) of the perturbation.

        :raises ConstraintError: If the state violates the zero x-mean constraint.
        """
        coefficients = self.perturbation_coefficients(state)
        self.check_constraint(coefficients)
        tendency = self.flow.linear_symbol * coefficients + self._perturbation_explicit(coefficients)
        return SpectralField.from_coefficients(grid=self.grid, coefficients=tendency)

    def linear_action(self, perturbation: SpectralField) -> SpectralField:
        """𝒥𝓛v, the tendency of the perturbation without the quadratic term."""
        coefficients = perturbation.coefficients
        tendency = self.flow.linear_symbol * coefficients + self.wave_remainder(coefficients)
        return SpectralField.from_coefficients(grid=self.grid, coefficients=tendency)

    def stiffness_bound(self, total_coefficients: npt.NDArray[np.complex128]) -> float:
        """The explicit stiffness bound about a field u."""
        derivative = inverse_transform(self.flow.derivative_symbol * total_coefficients).real
        second_derivative = inverse_transform(self.flow.derivative_symbol ** 2 * total_coefficients).real
        return explicit_stiffness_bound(self.flow.dealiased_maximum_wavenumber,
                                        float(np.max(np.abs(inverse_transform(total_coefficients).real))),
                                        float(np.max(np.abs(derivative))),
                                        float(np.max(np.abs(second_derivative))))

    def _guard(self, coefficients: npt.NDArray[np.complex128], form: FieldForm, time_step: float,
               step_index: int) -> npt.NDArray[np.complex128]:
        coefficients = self.project_constraint(coefficients)
        if not np.all(np.isfinite(coefficients)):
            error_message = f'Non-finite values appeared after {step_index} steps.'
            raise BlowupError(error_message)
        if form == FieldForm.MOVING_FRAME:
            total = coefficients
            perturbation = coefficients - self.wave_field.coefficients
        else:
            total = coefficients + self.wave_field.coefficients
            perturbation = coefficients
        slope = float(np.max(np.abs(inverse_transform(self.flow.derivative_symbol * total).real)))
        if slope > self.blowup_slope:
            error_message = (f'max |u_x| = {slope:.3e} exceeds the wave breaking guard {self.blowup_slope:.3e} after '
                             f'{step_index} steps.')
            raise BlowupError(error_message)
        stiffness_bound = self.stiffness_bound(total)
        if time_step * stiffness_bound > STABILITY_LIMIT:
            error_message = (f'The field has grown so that dt·B = {time_step * stiffness_bound:.3f} exceeds the '
                             f'stability limit {STABILITY_LIMIT} after {step_index} steps.')
            raise StabilityError(error_message)
        perturbation_values = inverse_transform(perturbation).real
        boundary_amplitude = float(np.max(np.abs(perturbation_values[:, [0, -1]])))
        if boundary_amplitude > BOUNDARY_TOLERANCE >= self.boundary_amplitude:
            logger.warning(f'The perturbation reached {boundary_amplitude:.3e} at the x-boundary after {step_index} '
                           f'steps.')
        self.boundary_amplitude = max(self.boundary_amplitude, boundary_amplitude)
        return coefficients

    def step(self, state: SimState, time_step: float | None = None) -> SimState:
        """
        Advances a state by one step, then projects onto the zero x-mean constraint.

        :param state: The state.
        :param time_step: The step size. Defaults to the simulator's.
        :return: The next state.
        :raises StabilityError: If the step size exceeds the stability bound about the current field.
        :raises BlowupError: If the field becomes non-finite or exceeds the wave breaking guard.
        """
        if time_step is None:
            time_step = self.time_step
        check_time_step(time_step, self.stiffness_bound(self.total_coefficients(state)))
        self.check_constraint(state.field.coefficients)
        samples = integrate(self.step_coefficients(time_step), state.field.coefficients, 1,
                            self._explicit_part(state.form), start_time=state.time,
                            after_step=lambda coefficients, step_index: self._guard(
                                coefficients, state.form, time_step, state.step_count + step_index))
        last_sample = list(samples)[-1]
        return self._state(last_sample.time, last_sample.state, state.step_count + 1, state.form)

    def trajectory(self, state: SimState, final_time: float, *, sample_stride: int = 1,
                   time_step: float | None = None) -> Iterator[SimState]:
        """
        Runs from a state to at least the final time, yielding the state every `sample_stride` steps, at the start and
        at the end.

        :param state: The initial state.
        :param final_time: The time to run to.
        :param sample_stride: The number of steps between yielded states.
        :param time_step: The step size. Defaults to the simulator's.
        :return: The sampled states.
        """
        if time_step is None:
            time_step = self.time_step
        check_time_step(time_step, self.stiffness_bound(self.total_coefficients(state)))
        self.check_constraint(state.field.coefficients)
        step_count = step_count_for(final_time - state.time, time_step)
        samples = integrate(self.step_coefficients(time_step), state.field.coefficients, step_count,
                            self._explicit_part(state.form), sample_stride=sample_stride, start_time=state.time,
                            after_step=lambda coefficients, step_index: self._guard(
                                coefficients, state.form, time_step, state.step_count + step_index))
        for sample in samples:
            yield self._state(sample.time, sample.state, state.step_count + sample.step_index, state.form)

    def advance(self, state: SimState, final_time: float, *, time_step: float | None = None) -> SimState:
        """Runs to at least the final time and returns the last state."""
        last_state = state
        for last_state in self.trajectory(state, final_time, sample_stride=STRIDE_OVER_WHOLE_RUN,
                                          time_step=time_step):
            pass
        return last_state

    def run_with_invariants(self, state: SimState, final_time: float, *, sample_stride: int = 1,
                            time_step: float | None = None) -> tuple[SimState, InvariantTrace]:
        """
        Runs to at least the final time, recording 𝓗 and 𝒬 every `sample_stride` steps.

        :return: The last state and the invariant trace.
        """
        trace = InvariantTrace()
        last_state = state
        for last_state in self.trajectory(state, final_time, sample_stride=sample_stride, time_step=time_step):
            trace.append(last_state.time, self.invariants(last_state))
        trace.boundary_amplitude = self.boundary_amplitude
        drifts = trace.relative_drifts() if trace.hamiltonians[0] and trace.impulses[0] else (0.0, 0.0)
        logger.info(f'Ran to t = {last_state.time:.4g} in {last_state.step_count} steps. Relative drift of H: '
                    f'{drifts[0]:.3e}, of Q: {drifts[1]:.3e}.')
        return last_state, trace

    def invariants(self, state: SimState) -> InvariantValues:
        """
        𝓗 = −½∫(u³ + uu_x² + 2κu² − (∂x⁻¹∂y u)²) and 𝒬 = ½∫(u² + u_x²) of the full field.

        :raises ConstraintError: If the state violates the zero x-mean constraint.
        """
        coefficients = self.total_coefficients(state)
        self.check_constraint(coefficients)
        return field_invariants(coefficients, self.grid, self.wave.kappa)

    def error_field(self, state: SimState, vap: SpectralField | None = None, *, amplitude: float | None = None,
                    order: int | None = None, growth_rate: float | None = None) -> ErrorDiagnostics:
        """
        The error w = u − φ − v^ap of a state.

        :param state: The simulated state.
        :param vap: The approximate solution at the state's time. Without it, w = u − φ.
        :param amplitude: The amplitude δ, for the bound ratio.
        :param order: The hierarchy order M, for the bound ratio.
        :param growth_rate: Re σ₀, for the bound ratio.
        :return: The diagnostics.
        """
        error_coefficients = self.perturbation_coefficients(state)
        if vap is not None:
            error_coefficients = error_coefficients - vap.coefficients
        error = SpectralField.from_coefficients(grid=self.grid, coefficients=error_coefficients)
        norms = {order_: sobolev_norm(error, order_) for order_ in ERROR_NORM_ORDERS}
        bound_ratio = None
        if amplitude is not None and order is not None and growth_rate is not None:
            bound_ratio = norms[0] / (amplitude ** (order + 2) * np.exp((order + 2) * growth_rate * state.time))
        return ErrorDiagnostics(time=state.time, field=error, norms=norms, bound_ratio=bound_ratio)


def field_invariants(coefficients: npt.NDArray[np.complex128], grid: Grid2D | Grid1D, kappa: float
                     ) -> InvariantValues:
    """𝓗 and 𝒬 of a real field from its coefficients, by quadrature on the grid."""
    x_wavenumbers = grid.odd_x_wavenumber_mesh
    values = inverse_transform(coefficients).real
    derivative = inverse_transform(1j * x_wavenumbers * coefficients).real
    with np.errstate(divide='ignore', invalid='ignore'):
        transverse_symbol = np.where(x_wavenumbers == 0, 0, grid.transverse_wavenumber_mesh / x_wavenumbers)
    transverse_potential = inverse_transform(transverse_symbol * coefficients).real
    weight = grid.quadrature_weight
    hamiltonian = -0.5 * weight * np.sum(values ** 3 + values * derivative ** 2 + 2 * kappa * values ** 2
                                         - transverse_potential ** 2)
    impulse = 0.5 * weight * np.sum(values ** 2 + derivative ** 2)
    return InvariantValues(hamiltonian=float(hamiltonian), impulse=float(impulse))


def save_snapshot(state: SimState, path: Path, *, parameters: dict | None = None) -> Path:
    """
    Writes the field values as a `.npy` array with a JSON sidecar holding the grid, the time and the parameters.

    :param state: The state.
    :param path: The array path. The sidecar is written next to it with the suffix `.json`.
    :param parameters: Additional parameters for the sidecar.
    :return: The array path.
    """
    path = Path(path).with_suffix('.npy')
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, state.field.values)
    grid = state.grid
    metadata = {
        'time': state.time,
        'speed': state.speed,
        'step_count': state.step_count,
        'form': str(state.form),
        'grid': {
            'half_length': grid.x_grid.half_length,
            'x_node_count': grid.x_grid.node_count,
            'base_frequency': grid.base_frequency,
            'y_node_count': grid.node_count,
        },
        'parameters': parameters or {},
    }
    path.with_suffix('.json').write_text(json.dumps(metadata, indent=2))
    return path


def load_snapshot(path: Path) -> SimState:
    """Reads a snapshot written by `save_snapshot`."""
    path = Path(path).with_suffix('.npy')
    metadata = json.loads(path.with_suffix('.json').read_text())
    grid_metadata = metadata['grid']
    x_grid = Grid1D.new(half_length=grid_metadata['half_length'], node_count=grid_metadata['x_node_count'])
    grid = Grid2D.new(x_grid=x_grid, base_frequency=grid_metadata['base_frequency'],
                      node_count=grid_metadata['y_node_count'])
    return SimState(time=metadata['time'], field=SpectralField.new(grid=grid, values=np.load(path)),
                    speed=metadata['speed'], step_count=metadata['step_count'], form=FieldForm(metadata['form']))


def export_invariant_trace_csv(trace: InvariantTrace, path: Path) -> Path:
    """Writes the trace with the columns t, H, Q."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trace.to_data_frame().to_csv(path, index=False)
    return path
