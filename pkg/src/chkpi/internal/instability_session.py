"""
End to end instability experiments: from the solitary wave through the spectral analysis and the approximate solution
to the simulated escape of δ-perturbations from the orbit of the wave.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import scipy.stats
from public import public
from typing_extensions import Self

from chkpi.internal.configuration import ExperimentConfiguration
from chkpi.internal.eigen_analysis import EigenBranch, scan_branch
from chkpi.internal.errors import ChkpiError, InsufficientDataError
from chkpi.internal.grid import Grid1D, Grid2D
from chkpi.internal.hierarchy import HierarchyResult, assemble_vap, build_hierarchy
from chkpi.internal.logging import format_amplitude, set_up_default_logger
from chkpi.internal.operator_matrix import instability_wavenumber_bound
from chkpi.internal.orbital_distance import orbital_distance, project_offzero_y
from chkpi.internal.simulation import SimState, Simulator, save_snapshot
from chkpi.internal.solitary_wave import SolitaryWave, compute_soliton
from chkpi.internal.spectral_field import SpectralField
from chkpi.internal.spectral_operations import sobolev_norm
from chkpi.internal.stability_conditions import ConditionReport, verify_rt_conditions
from chkpi.internal.unstable_mode import UnstableMode, select_most_unstable
from chkpi.internal.wandb_liaison import WandbLiaison

logger = logging.getLogger(__name__)

GROWTH_FIT_TOLERANCE = 0.05
SCALING_SLOPE_TOLERANCE = 0.1
SCALING_R_SQUARED_THRESHOLD = 0.99
LINEAR_WINDOW_FRACTION = 0.1
MINIMUM_SCALING_RUNS = 3
MINIMUM_SCALING_DECADES = 2.0
DEFAULT_THETA_FACTORS = (0.01, 0.05, 0.1)
GROWTH_TRACE_COLUMNS = ['t', 'norm_pi_v', 'norm_w', 'H', 'Q']


@public
@dataclass
class DeltaRecord:
    """
    The outcome of one simulated perturbation amplitude.

    :ivar delta: The amplitude δ.
    :ivar predicted_escape_time: T^δ = log(θ/δ)/Re σ₀.
    :ivar measured_escape_time: The first sampled time with ‖Πv‖ ≥ c_sθ/2, None if never reached.
    :ivar distance_at_escape: The orbital distance at T^δ.
    :ivar shift_at_escape: The minimizing shift at T^δ.
    :ivar growth_rate_fit: The slope of log ‖Πv‖ over the linear window.
    :ivar projected_approximation_norm: ‖Πv^ap(T^δ)‖.
    :ivar error_norm_at_escape: ‖w(T^δ)‖₀.
    :ivar max_error_norm: The largest sampled ‖w‖₀.
    :ivar hamiltonian_drift: The relative drift of 𝓗 along the run.
    :ivar boundary_amplitude: The largest |u − φ| seen on the outermost x-columns.
    :ivar trace_path: The growth trace CSV, once written.
    """

    delta: float
    predicted_escape_time: float
    measured_escape_time: float | None
    distance_at_escape: float
    shift_at_escape: float
    growth_rate_fit: float | None
    projected_approximation_norm: float
    error_norm_at_escape: float
    max_error_norm: float
    hamiltonian_drift: float
    boundary_amplitude: float
    trace_path: str | None = None

    @property
    def distance_chain_holds(self) -> bool:
        """Whether the distance at T^δ is at least ‖Πv^ap‖ − ‖w‖."""
        return self.distance_at_escape >= self.projected_approximation_norm - self.error_norm_at_escape - 1e-12

    def to_dict(self) -> dict[str, Any]:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, dictionary: dict[str, Any]) -> Self:
        return cls(**dictionary)


@public
@dataclass
class FailureRecord:
    delta: float
    error_type: str
    message: str


@public
@dataclass
class ScalingTable:
    """
    Measured escape times against log(1/δ), with their least squares line.
    """

    deltas: list[float]
    predicted_escape_times: list[float]
    measured_escape_times: list[float]
    distances: list[float]
    slope: float
    intercept: float
    r_squared: float

    @classmethod
    def from_records(cls, records: list[DeltaRecord]) -> Self:
        """
        Fits T_meas against log(1/δ) over the records that escaped.

        :raises InsufficientDataError: If fewer than three records escaped.
        """
        escaped = [record for record in records if record.measured_escape_time is not None]
        if len(escaped) < MINIMUM_SCALING_RUNS:
            error_message = (f'The escape time fit needs at least {MINIMUM_SCALING_RUNS} successful runs, but only '
                             f'{len(escaped)} escaped.')
            raise InsufficientDataError(error_message)
        escaped.sort(key=lambda record: -record.delta)
        log_inverse_deltas = np.log(1 / np.array([record.delta for record in escaped]))
        measured = np.array([record.measured_escape_time for record in escaped])
        regression = scipy.stats.linregress(log_inverse_deltas, measured)
        return cls(
            deltas=[record.delta for record in escaped],
            predicted_escape_times=[record.predicted_escape_time for record in escaped],
            measured_escape_times=measured.tolist(),
            distances=[record.distance_at_escape for record in escaped],
            slope=float(regression.slope),
            intercept=float(regression.intercept),
            r_squared=float(regression.rvalue ** 2),
        )

    def to_data_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'delta': self.deltas,
            'T_delta_pred': self.predicted_escape_times,
            'T_meas': self.measured_escape_times,
            'distance_at_T': self.distances,
        })


@public
@dataclass
class RunReport:
    """
    The report of an instability experiment. The branch, the growth traces and the hierarchy norms are kept alongside
    for the output files but are not part of the JSON form.

    :ivar configuration: The configuration as a dictionary.
    :ivar base_frequency: The base transverse frequency k₀.
    :ivar mode_index: The selected m₀.
    :ivar growth_rate: The selected σ₀ as [Re, Im].
    :ivar largest_unstable_index: The largest unstable integer multiple of k₀.
    :ivar theta: The escape amplitude θ.
    :ivar projection_constant: c_s = ‖Πv⁰(0)‖_s.
    :ivar conditions: The verdicts on the spectral conditions.
    :ivar records: One record per simulated δ that completed.
    :ivar failures: One record per δ whose run failed.
    :ivar scaling: The escape time fit, None with fewer than three escapes.
    :ivar plot_paths: The plot files by name, once written.
    """

    configuration: dict[str, Any]
    base_frequency: float
    mode_index: int
    growth_rate: list[float]
    largest_unstable_index: int
    theta: float
    projection_constant: float
    conditions: ConditionReport
    records: list[DeltaRecord] = field(default_factory=list)
    failures: list[FailureRecord] = field(default_factory=list)
    scaling: ScalingTable | None = None
    plot_paths: dict[str, str] = field(default_factory=dict)
    branch_table: pd.DataFrame | None = field(default=None, compare=False, repr=False)
    traces: dict[float, pd.DataFrame] = field(default_factory=dict, compare=False, repr=False)
    hierarchy_table: pd.DataFrame | None = field(default=None, compare=False, repr=False)

    @property
    def real_growth_rate(self) -> float:
        return self.growth_rate[0]

    @property
    def distance_floor(self) -> float | None:
        """η, the smallest orbital distance at T^δ over the completed runs."""
        if not self.records:
            return None
        return min(record.distance_at_escape for record in self.records)

    def verdicts(self) -> dict[str, dict[str, Any]]:
        """Each acceptance verdict with its margin. A positive margin passes."""
        verdicts: dict[str, dict[str, Any]] = {
            'conditions': {'passed': self.conditions.passed,
                           'margin': min(entry.margin - entry.threshold for entry in self.conditions.entries)},
            'no_failures': {'passed': not self.failures, 'margin': -float(len(self.failures))},
        }
        fits = [record.growth_rate_fit for record in self.records if record.growth_rate_fit is not None]
        if fits:
            deviation = max(abs(fit / self.real_growth_rate - 1) for fit in fits)
            verdicts['growth_fit'] = {'passed': deviation <= GROWTH_FIT_TOLERANCE,
                                      'margin': GROWTH_FIT_TOLERANCE - deviation}
        if self.records:
            chain_margin = min(record.distance_at_escape - record.projected_approximation_norm
                               + record.error_norm_at_escape for record in self.records)
            verdicts['distance_chain'] = {'passed': all(record.distance_chain_holds for record in self.records),
                                          'margin': chain_margin}
            verdicts['distance_floor'] = {'passed': self.distance_floor > 0, 'margin': self.distance_floor}
        if self.scaling is not None:
            slope_deviation = abs(self.scaling.slope * self.real_growth_rate - 1)
            verdicts['scaling_slope'] = {'passed': slope_deviation <= SCALING_SLOPE_TOLERANCE,
                                         'margin': SCALING_SLOPE_TOLERANCE - slope_deviation}
            verdicts['scaling_r_squared'] = {'passed': self.scaling.r_squared > SCALING_R_SQUARED_THRESHOLD,
                                             'margin': self.scaling.r_squared - SCALING_R_SQUARED_THRESHOLD}
        return verdicts

    @property
    def passed(self) -> bool:
        return all(verdict['passed'] for verdict in self.verdicts().values())

    def to_dict(self) -> dict[str, Any]:
        return {
            'configuration': self.configuration,
            'base_frequency': self.base_frequency,
            'mode_index': self.mode_index,
            'growth_rate': self.growth_rate,
            'largest_unstable_index': self.largest_unstable_index,
            'theta': self.theta,
            'projection_constant': self.projection_constant,
            'conditions': self.conditions.to_dict(),
            'records': [record.to_dict() for record in self.records],
            'failures': [failure.__dict__ for failure in self.failures],
            'scaling': None if self.scaling is None else self.scaling.__dict__,
            'plot_paths': self.plot_paths,
            'distance_floor': self.distance_floor,
            'verdicts': self.verdicts(),
            'passed': self.passed,
        }

    @classmethod
    def from_dict(cls, dictionary: dict[str, Any]) -> Self:
        scaling = dictionary['scaling']
        return cls(
            configuration=dictionary['configuration'],
            base_frequency=dictionary['base_frequency'],
            mode_index=dictionary['mode_index'],
            growth_rate=dictionary['growth_rate'],
            largest_unstable_index=dictionary['largest_unstable_index'],
            theta=dictionary['theta'],
            projection_constant=dictionary['projection_constant'],
            conditions=ConditionReport.from_dict(dictionary['conditions']),
            records=[DeltaRecord.from_dict(record) for record in dictionary['records']],
            failures=[FailureRecord(**failure) for failure in dictionary['failures']],
            scaling=None if scaling is None else ScalingTable(**scaling),
            plot_paths=dictionary['plot_paths'],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> Self:
        return cls.from_dict(json.loads(text))

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path

    @classmethod
    def load(cls, path: Path) -> Self:
        return cls.from_json(Path(path).read_text())


@dataclass
class InstabilityContext:
    """Everything shared by the simulated amplitudes of one experiment."""

    configuration: ExperimentConfiguration
    wave: SolitaryWave
    branch: EigenBranch
    conditions: ConditionReport
    mode: UnstableMode
    grid: Grid2D
    simulator: Simulator
    hierarchy: HierarchyResult

    @property
    def real_growth_rate(self) -> float:
        return self.mode.real_growth_rate

    @property
    def sobolev_order(self) -> float:
        return self.configuration.run.sobolev_s

    def predicted_escape_time(self, delta: float) -> float:
        return float(np.log(self.configuration.theta / delta) / self.real_growth_rate)

    def initial_perturbation(self, delta: float) -> SpectralField:
        return SpectralField.new(grid=self.grid, values=delta * self.mode.perturbation_values(self.grid))

    @property
    def projection_constant(self) -> float:
        return sobolev_norm(project_offzero_y(self.initial_perturbation(1.0)), self.sobolev_order)


def build_wave(configuration: ExperimentConfiguration) -> SolitaryWave:
    physics = configuration.physics
    x_grid = Grid1D.new(half_length=configuration.half_length, node_count=configuration.grid.nx)
    return compute_soliton(physics.c, physics.kappa, x_grid)


def scan_configured_branch(configuration: ExperimentConfiguration, wave: SolitaryWave) -> EigenBranch:
    spectrum = configuration.spectrum
    maximum_wavenumber = spectrum.k_max
    if maximum_wavenumber is None:
        maximum_wavenumber = 2 * instability_wavenumber_bound(wave)
    return scan_branch(wave, spectrum.k_min, maximum_wavenumber, spectrum.n_samples,
                       growth_tolerance=spectrum.tol_growth, workers=spectrum.workers)


def select_configured_mode(configuration: ExperimentConfiguration, branch: EigenBranch) -> UnstableMode:
    base_frequency = configuration.spectrum.k0
    if base_frequency is None:
        base_frequency = branch.most_unstable_wavenumber
    return select_most_unstable(branch, base_frequency, growth_tolerance=configuration.spectrum.tol_growth)


def prepare_context(configuration: ExperimentConfiguration) -> InstabilityContext:
    """
    Builds the wave, scans the branch, checks the spectral conditions, selects the mode and integrates the
    approximate solution up to the horizon of the smallest δ.
    """
    wave = build_wave(configuration)
    logger.info(f'Solitary wave built for c = {wave.speed}, κ = {wave.kappa} on {wave.grid.node_count} nodes.')
    branch = scan_configured_branch(configuration, wave)
    logger.info(f'Unstable band: {branch.band}. Largest growth rate {branch.maximum_growth_rate:.6f}.')
    conditions = verify_rt_conditions(wave, branch.wavenumbers)
    mode = select_configured_mode(configuration, branch)
    logger.info(f'Selected m₀ = {mode.mode_index} for k₀ = {mode.base_frequency:.6f} with σ₀ = {mode.growth_rate:.6f}.')
    order = configuration.run.hierarchy_order
    grid = Grid2D.new(x_grid=wave.grid, base_frequency=mode.base_frequency, node_count=configuration.grid.ny,
                      maximum_resolved_mode=(order + 1) * mode.mode_index)
    simulator = Simulator.new(wave=wave, grid=grid, time_step=configuration.run.time_step,
                              epsilon=configuration.physics.epsilon, blowup_slope=configuration.run.blowup_slope)
    horizon = configuration.run.horizon_factor * max(
        float(np.log(configuration.theta / delta) / mode.real_growth_rate) for delta in configuration.run.delta_list)
    hierarchy = build_hierarchy(mode, order, horizon, time_step=simulator.time_step,
                                sample_stride=configuration.run.sample_stride, epsilon=configuration.physics.epsilon,
                                sobolev_order=configuration.run.sobolev_s)
    return InstabilityContext(configuration=configuration, wave=wave, branch=branch, conditions=conditions, mode=mode,
                              grid=grid, simulator=simulator, hierarchy=hierarchy)


def fit_linear_growth(trace: pd.DataFrame, upper_norm: float) -> float | None:
    """The slope of log ‖Πv‖ over the samples below `upper_norm`, None with fewer than two such samples."""
    window = trace[(trace['norm_pi_v'] > 0) & (trace['norm_pi_v'] <= upper_norm)]
    if len(window) < 2:
        return None
    slope, _ = np.polyfit(window['t'], np.log(window['norm_pi_v']), deg=1)
    return float(slope)


def simulate_delta(context: InstabilityContext, delta: float) -> tuple[DeltaRecord, pd.DataFrame, SimState]:
    """
    Simulates φ + δv⁰(0) up to T^δ while recording ‖Πv‖, ‖w‖, 𝓗 and 𝒬.

    :param context: The shared experiment context.
    :param delta: The amplitude δ.
    :return: The record, the growth trace and the final state.
    """
    configuration = context.configuration
    simulator = context.simulator.fork()
    theta = configuration.theta
    order = configuration.run.hierarchy_order
    sobolev_order = context.sobolev_order
    escape_threshold = context.projection_constant * theta / 2
    predicted_escape_time = context.predicted_escape_time(delta)
    state = simulator.initial_state(context.initial_perturbation(delta))
    rows = []
    measured_escape_time = None
    approximation = None
    error_norm = 0.0
    for state in simulator.trajectory(state, predicted_escape_time, sample_stride=configuration.run.sample_stride):
        approximation = assemble_vap(context.hierarchy, delta, state.time, context.grid, order=order)
        error_norm = simulator.error_field(state, approximation).norms[0]
        projected_norm = sobolev_norm(project_offzero_y(state.field), sobolev_order)
        invariants = simulator.invariants(state)
        rows.append((state.time, projected_norm, error_norm, invariants.hamiltonian, invariants.impulse))
        if measured_escape_time is None and projected_norm >= escape_threshold:
            measured_escape_time = state.time
    trace = pd.DataFrame(rows, columns=GROWTH_TRACE_COLUMNS)
    total_field = SpectralField.from_coefficients(grid=context.grid, coefficients=simulator.total_coefficients(state))
    distance, shift = orbital_distance(total_field, context.wave)
    hamiltonians = trace['H'].to_numpy()
    record = DeltaRecord(
        delta=delta,
        predicted_escape_time=predicted_escape_time,
        measured_escape_time=measured_escape_time,
        distance_at_escape=distance,
        shift_at_escape=shift,
        growth_rate_fit=fit_linear_growth(trace, LINEAR_WINDOW_FRACTION * theta),
        projected_approximation_norm=sobolev_norm(project_offzero_y(approximation)),
        error_norm_at_escape=error_norm,
        max_error_norm=float(trace['norm_w'].max()),
        hamiltonian_drift=float(np.max(np.abs(hamiltonians - hamiltonians[0])) / abs(hamiltonians[0])),
        boundary_amplitude=simulator.boundary_amplitude,
    )
    if measured_escape_time is None:
        logger.warning(f'δ = {format_amplitude(delta)} did not reach ‖Πv‖ = {escape_threshold:.3e} by '
                       f't = {state.time:.3f}.')
    else:
        logger.info(f'δ = {format_amplitude(delta)} escaped at t = {measured_escape_time:.3f} '
                    f'(predicted {predicted_escape_time:.3f}), orbital distance {distance:.4e}.')
    return record, trace, state


def run_instability(configuration: ExperimentConfiguration | None = None) -> RunReport:
    """
    Runs the instability experiment: the spectral pipeline once, then one simulation per δ. A failing δ is recorded
    in the report and the sweep continues.

    :param configuration: The configuration. Defaults to `ExperimentConfiguration()`.
    :return: The report.
    """
    if configuration is None:
        configuration = ExperimentConfiguration()
    configuration.validate()
    set_up_default_logger()
    liaison = WandbLiaison(configuration.tracking.wandb_project, configuration.tracking.wandb_entity)
    liaison.init(config=configuration.to_dict())
    try:
        context = prepare_context(configuration)
        report = RunReport(
            configuration=configuration.to_dict(),
            base_frequency=context.mode.base_frequency,
            mode_index=context.mode.mode_index,
            growth_rate=[float(context.mode.growth_rate.real), float(context.mode.growth_rate.imag)],
            largest_unstable_index=context.mode.largest_unstable_index,
            theta=configuration.theta,
            projection_constant=context.projection_constant,
            conditions=context.conditions,
            branch_table=context.branch.to_data_frame(),
            hierarchy_table=context.hierarchy.to_data_frame(),
        )
        liaison.log_hyperparameter_dictionary({'base_frequency': report.base_frequency, 'mode_index': report.mode_index,
                                               'real_growth_rate': report.real_growth_rate,
                                               'time_step': context.simulator.time_step})

        def simulate_or_fail(delta: float) -> tuple[DeltaRecord, pd.DataFrame, SimState] | FailureRecord:
            try:
                return simulate_delta(context, delta)
            except (ChkpiError, ValueError) as error:
                logger.warning(f'The run for δ = {format_amplitude(delta)} failed: {type(error).__name__}: {error}')
                return FailureRecord(delta=delta, error_type=type(error).__name__, message=str(error))

        with ThreadPoolExecutor(max_workers=configuration.run.workers) as executor:
            outcomes = list(executor.map(simulate_or_fail, configuration.run.delta_list))
        for delta, outcome in zip(configuration.run.delta_list, outcomes):
            if isinstance(outcome, FailureRecord):
                report.failures.append(outcome)
                continue
            record, trace, final_state = outcome
            report.records.append(record)
            report.traces[delta] = trace
            if configuration.out.snapshots:
                save_snapshot(final_state, configuration.out.dir / 'snapshots' / f'state_{format_amplitude(delta)}',
                              parameters={'delta': delta, 'theta': configuration.theta})
            liaison.log_dictionary({f'{format_amplitude(delta)}/{key}': value
                                    for key, value in record.to_dict().items() if isinstance(value, float)})
            liaison.commit()
        try:
            report.scaling = ScalingTable.from_records(report.records)
            logger.info(f'Escape time fit: slope {report.scaling.slope:.4f} (1/Re σ₀ = '
                        f'{1 / report.real_growth_rate:.4f}), R² = {report.scaling.r_squared:.5f}.')
            liaison.log_dictionary({'scaling/slope': report.scaling.slope,
                                    'scaling/r_squared': report.scaling.r_squared})
            liaison.commit()
        except InsufficientDataError as error:
            logger.info(f'No escape time fit: {error}')
    finally:
        liaison.finish()
    return report


def scaling_study(configuration: ExperimentConfiguration) -> tuple[ScalingTable, RunReport]:
    """
    Runs the experiment over at least three amplitudes spanning two decades and fits the escape times.

    :param configuration: The configuration.
    :return: The scaling table and the full report.
    :raises ValueError: If the amplitudes are too few or span less than two decades.
    :raises InsufficientDataError: If fewer than three runs escape.
    """
    deltas = configuration.run.delta_list
    if len(deltas) < MINIMUM_SCALING_RUNS or np.log10(max(deltas) / min(deltas)) < MINIMUM_SCALING_DECADES - 1e-9:
        error_message = (f'A scaling study needs at least {MINIMUM_SCALING_RUNS} amplitudes spanning '
                         f'{MINIMUM_SCALING_DECADES:.0f} decades, but {list(deltas)} was given.')
        raise ValueError(error_message)
    report = run_instability(configuration)
    if report.scaling is None:
        error_message = (f'Only {len(report.records)} of {len(deltas)} runs completed and fewer than '
                         f'{MINIMUM_SCALING_RUNS} escaped.')
        raise InsufficientDataError(error_message)
    return report.scaling, report


@public
@dataclass
class ThetaSweep:
    """
    Escape time fits for several escape amplitudes θ.

    :ivar thetas: The escape amplitudes.
    :ivar reports: One report per θ.
    :ivar real_growth_rate: Re σ₀.
    """

    thetas: list[float]
    reports: list[RunReport]
    real_growth_rate: float

    def intercept_shifts(self) -> list[float | None]:
        """The intercept of each fit relative to the first, None where a fit is missing."""
        reference = self.reports[0].scaling
        return [None if reference is None or report.scaling is None else report.scaling.intercept - reference.intercept
                for report in self.reports]

    def predicted_intercept_shifts(self) -> list[float]:
        return [float(np.log(theta / self.thetas[0]) / self.real_growth_rate) for theta in self.thetas]

    def to_data_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'theta': self.thetas,
            'intercept': [None if report.scaling is None else report.scaling.intercept for report in self.reports],
            'intercept_shift': self.intercept_shifts(),
            'predicted_intercept_shift': self.predicted_intercept_shifts(),
        })


def theta_sweep(configuration: ExperimentConfiguration,
                factors: tuple[float, ...] = DEFAULT_THETA_FACTORS) -> ThetaSweep:
    """
    Runs the experiment for θ = factor·(c − 2κ), keeping only the amplitudes below each θ.

    :param configuration: The configuration.
    :param factors: The factors of c − 2κ.
    :return: The sweep.
    """
    thetas = [factor * configuration.physics.amplitude for factor in factors]
    reports = []
    for theta in thetas:
        deltas = tuple(delta for delta in configuration.run.delta_list if delta < theta)
        swept = replace(configuration, run=replace(configuration.run, theta=theta, delta_list=deltas))
        logger.info(f'θ sweep: running θ = {theta:.4g} with {len(deltas)} amplitudes.')
        reports.append(run_instability(swept))
    return ThetaSweep(thetas=thetas, reports=reports, real_growth_rate=reports[0].real_growth_rate)
