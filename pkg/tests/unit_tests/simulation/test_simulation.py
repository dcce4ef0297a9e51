import numpy as np
import pandas as pd
import pytest

from chkpi.internal.eigen_analysis import scan_branch
from chkpi.internal.errors import BlowupError, ConstraintError, StabilityError
from chkpi.internal.grid import Grid1D, Grid2D
from chkpi.internal.operator_matrix import instability_wavenumber_bound
from chkpi.internal.simulation import (
    FieldForm,
    InvariantTrace,
    InvariantValues,
    SimState,
    Simulator,
    export_invariant_trace_csv,
    load_snapshot,
    save_snapshot,
)
from chkpi.internal.solitary_wave import compute_soliton, hamiltonian, impulse, stationary_gradient
from chkpi.internal.spectral_field import SpectralField, x_forward_transform, x_inverse_transform
from chkpi.internal.spectral_operations import apply_J, sobolev_norm
from chkpi.internal.unstable_mode import select_most_unstable


@pytest.fixture(scope='module')
def wave():
    grid = Grid1D.new(half_length=40.0, node_count=256)
    return compute_soliton(3.0, 1.0, grid, tail_tolerance=1e-8)


@pytest.fixture(scope='module')
def mode(wave):
    branch = scan_branch(wave, 0.0, 2 * instability_wavenumber_bound(wave), 13)
    return select_most_unstable(branch, branch.most_unstable_wavenumber)


@pytest.fixture(scope='module')
def grid(wave, mode):
    return Grid2D.new(x_grid=wave.grid, base_frequency=mode.base_frequency, node_count=16)


@pytest.fixture
def simulator(wave, grid):
    return Simulator.new(wave=wave, grid=grid)


def smooth_perturbation(grid: Grid2D, amplitude: float, seed: int = 0) -> SpectralField:
    """A smooth localized field with transverse modes 0, 1 and 2, zero x-mean on the nonzero modes."""
    random_generator = np.random.default_rng(seed)
    x = grid.x_grid.nodes[np.newaxis, :]
    y = grid.nodes[:, np.newaxis]
    gaussian = np.exp(-x ** 2 / 9)
    phases = random_generator.uniform(0, 2 * np.pi, size=3)
    values = (gaussian * np.cos(phases[0])
              + x * gaussian * np.cos(grid.base_frequency * y + phases[1])
              + (1 - 2 * x ** 2 / 9) * gaussian * np.cos(2 * grid.base_frequency * y + phases[2]))
    return SpectralField.new(grid=grid, values=amplitude * values)


def band_limited_profile(x_grid: Grid1D, maximum_index: int) -> np.ndarray:
    coefficients = x_forward_transform(0.4 * np.exp(-(x_grid.nodes - 1) ** 2 / 6))
    coefficients[np.abs(x_grid.mode_indices) > maximum_index] = 0
    return x_inverse_transform(coefficients).real


class TestSimulatorNew:
    def test_rejects_foreign_x_grid(self, wave, mode):
        other_x_grid = Grid1D.new(half_length=40.0, node_count=128)
        grid = Grid2D.new(x_grid=other_x_grid, base_frequency=mode.base_frequency, node_count=16)
        with pytest.raises(ValueError):
            Simulator.new(wave=wave, grid=grid)

    def test_rejects_unstable_time_step(self, wave, grid):
        with pytest.raises(StabilityError):
            Simulator.new(wave=wave, grid=grid, time_step=1.0)

    def test_default_guard_scales_with_wave_amplitude(self, simulator, wave):
        assert simulator.blowup_slope == pytest.approx(50 * (wave.speed - 2 * wave.kappa))


class TestRhs:
    def test_wave_is_steady_in_moving_frame(self, simulator):
        state = simulator.initial_state(form=FieldForm.MOVING_FRAME)
        tendency = simulator.rhs_moving_frame(state)
        assert sobolev_norm(tendency) < 1e-4 * sobolev_norm(simulator.wave_field)

    def test_zero_field_has_zero_tendency(self, simulator, grid):
        state = simulator.initial_state(SpectralField.zeros(grid) - simulator.wave_field,
                                        form=FieldForm.MOVING_FRAME)
        assert np.max(np.abs(simulator.rhs_moving_frame(state).values)) < 1e-14
        zero_perturbation = simulator.initial_state()
        assert np.all(simulator.rhs_perturbation(zero_perturbation).values == 0)

    def test_y_independent_field_follows_one_dimensional_equation(self, simulator, grid, wave):
        x_grid = grid.x_grid
        profile = band_limited_profile(x_grid, 40)
        profile_field = SpectralField.new(grid=x_grid, values=profile)
        derivative = x_inverse_transform(1j * x_grid.odd_wavenumbers * profile_field.coefficients).real
        second_derivative = x_inverse_transform(-x_grid.odd_wavenumbers ** 2 * profile_field.coefficients).real
        gradient = stationary_gradient(profile, derivative, second_derivative, wave.speed, wave.kappa)
        expected = apply_J(SpectralField.new(grid=x_grid, values=gradient)).values
        state = simulator.initial_state(
            SpectralField.new(grid=grid, values=np.broadcast_to(profile, grid.shape)) - simulator.wave_field,
            form=FieldForm.MOVING_FRAME)
        tendency = simulator.rhs_moving_frame(state).values
        assert np.allclose(tendency, expected[np.newaxis, :], atol=1e-10)

    def test_moving_frame_and_perturbation_forms_agree(self, simulator, grid):
        perturbation = simulator.initial_state(smooth_perturbation(grid, 0.1))
        moving_frame = simulator.initial_state(smooth_perturbation(grid, 0.1), form=FieldForm.MOVING_FRAME)
        wave_tendency = simulator.rhs_moving_frame(simulator.initial_state(form=FieldForm.MOVING_FRAME))
        difference = (simulator.rhs_moving_frame(moving_frame) - simulator.rhs_perturbation(perturbation)
                      - wave_tendency)
        assert np.max(np.abs(difference.values)) < 1e-10

    def test_quadratic_remainder_scales_with_amplitude_squared(self, simulator, grid):
        direction = smooth_perturbation(grid, 1.0, seed=3)
        remainders = []
        for amplitude in (1e-3, 1e-4):
            state = simulator.initial_state(direction * amplitude)
            linear = simulator.linear_action(state.field)
            remainders.append(sobolev_norm(simulator.rhs_perturbation(state) - linear))
        assert remainders[0] / remainders[1] == pytest.approx(100, rel=0.05)

    def test_linearization_matches_eigenpair(self, simulator, mode, grid):
        amplitude = 1e-8
        initial_field = SpectralField.new(grid=grid, values=amplitude * mode.perturbation_values(grid))
        tendency = simulator.rhs_perturbation(simulator.initial_state(initial_field))
        transverse_phase = np.exp(1j * mode.transverse_frequency * grid.nodes)[:, np.newaxis]
        expected = amplitude * 2 * np.real(mode.growth_rate * transverse_phase * mode.profile[np.newaxis, :])
        expected_field = SpectralField.new(grid=grid, values=expected)
        assert sobolev_norm(tendency - expected_field) < 1e-3 * sobolev_norm(expected_field)

    def test_rejects_nonzero_mean_on_transverse_mode(self, simulator, grid):
        values = np.cos(grid.base_frequency * grid.nodes)[:, np.newaxis] * np.ones(grid.x_grid.node_count)
        field = SpectralField.new(grid=grid, values=1e-3 * values)
        state = SimState(time=0.0, field=field, speed=simulator.wave.speed)
        with pytest.raises(ConstraintError):
            simulator.rhs_perturbation(state)
        with pytest.raises(ConstraintError):
            simulator.invariants(state)


class TestStep:
    def test_step_keeps_wave_steady(self, simulator):
        state = simulator.initial_state(form=FieldForm.MOVING_FRAME)
        tendency_norm = sobolev_norm(simulator.rhs_moving_frame(state))
        next_state = simulator.step(state, 1e-3)
        change = sobolev_norm(next_state.field - simulator.wave_field)
        assert next_state.step_count == 1
        assert next_state.time == pytest.approx(1e-3)
        assert change <= 2e-3 * tendency_norm + 1e-12

    def test_step_projects_constraint(self, simulator, grid):
        state = simulator.initial_state(smooth_perturbation(grid, 0.1))
        next_state = simulator.step(state)
        assert np.max(np.abs(next_state.field.coefficients[1:, 0])) < 1e-15

    def test_fourth_order_convergence(self, simulator, grid):
        state = simulator.initial_state(smooth_perturbation(grid, 0.1, seed=1), form=FieldForm.MOVING_FRAME)
        final_states = [simulator.advance(state, 0.4, time_step=time_step) for time_step in (0.04, 0.02, 0.01)]
        coarse_difference = sobolev_norm(final_states[0].field - final_states[1].field)
        fine_difference = sobolev_norm(final_states[1].field - final_states[2].field)
        assert coarse_difference / fine_difference == pytest.approx(16, rel=0.2)

    def test_linear_regime_grows_at_eigenvalue(self, simulator, mode, grid):
        amplitude = 1e-6
        initial_field = SpectralField.new(grid=grid, values=amplitude * mode.perturbation_values(grid))
        state = simulator.initial_state(initial_field)
        final_state = simulator.advance(state, 2 / mode.real_growth_rate)
        ratio = sobolev_norm(final_state.field) / sobolev_norm(state.field)
        assert ratio == pytest.approx(np.exp(mode.real_growth_rate * final_state.time), rel=0.01)

    def test_trajectory_samples_at_stride_and_end(self, simulator, grid):
        state = simulator.initial_state(smooth_perturbation(grid, 0.01))
        states = list(simulator.trajectory(state, 7 * simulator.time_step, sample_stride=3))
        assert [sampled.step_count for sampled in states] == [0, 3, 6, 7]

    def test_wave_breaking_guard(self, wave, grid):
        simulator = Simulator.new(wave=wave, grid=grid, blowup_slope=1e-3)
        with pytest.raises(BlowupError):
            simulator.step(simulator.initial_state(form=FieldForm.MOVING_FRAME))

    def test_boundary_monitor_records_amplitude(self, simulator, grid):
        field = SpectralField.new(grid=grid, values=np.full(grid.shape, 1e-6))
        simulator.step(simulator.initial_state(field))
        assert simulator.boundary_amplitude == pytest.approx(1e-6, rel=1e-3)

    def test_fork_has_its_own_boundary_monitor(self, simulator, grid):
        field = SpectralField.new(grid=grid, values=np.full(grid.shape, 1e-6))
        simulator.step(simulator.initial_state(field))
        forked = simulator.fork()
        assert forked.boundary_amplitude == 0.0
        assert forked.flow is simulator.flow
        assert forked.time_step == simulator.time_step
        forked.step(forked.initial_state(field * 2.0))
        assert forked.boundary_amplitude == pytest.approx(2e-6, rel=1e-3)
        assert simulator.boundary_amplitude == pytest.approx(1e-6, rel=1e-3)


class TestInvariants:
    def test_zero_field(self, simulator, grid):
        state = simulator.initial_state(SpectralField.zeros(grid) - simulator.wave_field,
                                        form=FieldForm.MOVING_FRAME)
        assert simulator.invariants(state) == InvariantValues(hamiltonian=0.0, impulse=0.0)

    def test_y_independent_field_reduces_to_line_integrals(self, simulator, wave, grid):
        values = simulator.invariants(simulator.initial_state())
        assert values.hamiltonian == pytest.approx(grid.period * hamiltonian(wave), rel=1e-12)
        assert values.impulse == pytest.approx(grid.period * impulse(wave), rel=1e-12)

    def test_drift_converges_under_step_refinement(self, simulator, grid):
        initial_values = smooth_perturbation(grid, 0.1, seed=2).values + simulator.wave_field.values
        truncated = SpectralField.from_coefficients(
            grid=grid, coefficients=simulator.dealiasing_mask * SpectralField.new(grid=grid,
                                                                                 values=initial_values).coefficients)
        state = simulator.initial_state(truncated - simulator.wave_field, form=FieldForm.MOVING_FRAME)
        drifts = []
        for time_step in (0.04, 0.02):
            _, trace = simulator.run_with_invariants(state, 2.0, sample_stride=5, time_step=time_step)
            drifts.append(trace.relative_drifts()[0])
        assert drifts[0] / drifts[1] >= 8


class TestErrorField:
    def test_without_approximation_is_the_perturbation(self, simulator, grid):
        state = simulator.initial_state(smooth_perturbation(grid, 0.01), form=FieldForm.MOVING_FRAME)
        diagnostics = simulator.error_field(state)
        assert np.allclose(diagnostics.field.values, state.field.values - simulator.wave_field.values, atol=1e-15)
        assert diagnostics.bound_ratio is None

    def test_vanishes_at_start(self, simulator, mode, grid):
        amplitude = 1e-3
        initial_field = SpectralField.new(grid=grid, values=amplitude * mode.perturbation_values(grid))
        state = simulator.initial_state(initial_field)
        approximation = SpectralField.from_coefficients(
            grid=grid, coefficients=simulator.project_constraint(initial_field.coefficients))
        diagnostics = simulator.error_field(state, approximation, amplitude=amplitude, order=1,
                                            growth_rate=mode.real_growth_rate)
        assert diagnostics.norms == {0: 0.0, 1: 0.0, 2: 0.0}
        assert diagnostics.bound_ratio == 0.0


def test_snapshot_round_trip(simulator, grid, tmp_path):
    state = simulator.step(simulator.initial_state(smooth_perturbation(grid, 0.01)))
    path = save_snapshot(state, tmp_path / 'snapshots' / 'state', parameters={'amplitude': 0.01})
    loaded = load_snapshot(path)
    assert path.with_suffix('.json').exists()
    assert np.array_equal(loaded.field.values, state.field.values)
    assert loaded.grid == grid
    assert (loaded.time, loaded.step_count, loaded.form) == (state.time, 1, FieldForm.PERTURBATION)


def test_invariant_trace_csv(tmp_path):
    trace = InvariantTrace()
    trace.append(0.0, InvariantValues(hamiltonian=-2.0, impulse=1.0))
    trace.append(0.5, InvariantValues(hamiltonian=-2.0 + 1e-9, impulse=1.0))
    path = export_invariant_trace_csv(trace, tmp_path / 'invariants.csv')
    data_frame = pd.read_csv(path)
    assert list(data_frame.columns) == ['t', 'H', 'Q']
    assert trace.relative_drifts()[0] == pytest.approx(5e-10)


def test_invariant_trace_rejects_non_finite_values():
    with pytest.raises(BlowupError):
        InvariantTrace().append(0.0, InvariantValues(hamiltonian=float('nan'), impulse=1.0))
