"""Tests for the solitary wave construction and diagnostics."""
import numpy as np
import pandas as pd
import pytest

from chkpi.internal.errors import ParameterError, ResolutionError
from chkpi.internal.grid import Grid1D
from chkpi.internal.solitary_wave import (
    SolitaryWave,
    compute_soliton,
    default_half_length,
    export_soliton_csv,
    first_integral_residual,
    position_of_log_height,
    profile_height_at,
    properties_report,
    traveling_wave_residual,
)


@pytest.fixture(scope='module')
def fine_grid() -> Grid1D:
    return Grid1D.new(half_length=default_half_length(3.0, 1.0), node_count=2048)


@pytest.fixture(scope='module')
def wave(fine_grid) -> SolitaryWave:
    return compute_soliton(3.0, 1.0, fine_grid)


class TestComputeSoliton:
    def test_peak_height(self, wave):
        assert wave.profile[wave.grid.node_count // 2] == pytest.approx(1.0, abs=1e-10)
        assert np.max(wave.profile) == pytest.approx(1.0, abs=1e-10)

    def test_tail_decay_rate(self, wave):
        assert wave.decay_rate == pytest.approx(np.sqrt(1 / 3), rel=0.01)

    def test_first_integral_residual(self, wave):
        assert first_integral_residual(wave) < 1e-8

    def test_traveling_wave_residual(self, wave):
        assert traveling_wave_residual(wave) < 1e-8

    def test_profile_bounds(self, wave):
        assert np.all(wave.profile >= 0)
        assert np.all(wave.profile <= 1.0 + 1e-15)

    def test_non_degeneracy(self, wave):
        assert np.min(wave.speed - wave.profile) == pytest.approx(2.0, abs=1e-10)

    def test_refinement_changes_profile_negligibly(self, wave):
        coarse_grid = Grid1D.new(half_length=wave.grid.half_length, node_count=1024)
        coarse_wave = compute_soliton(3.0, 1.0, coarse_grid)
        assert np.max(np.abs(wave.profile[::2] - coarse_wave.profile)) < 1e-9

    def test_quadrature_is_consistent_with_inversion(self):
        height = profile_height_at(2.5, 3.0, 1.0)
        assert position_of_log_height(np.log(height), 3.0, 1.0) == pytest.approx(2.5, abs=1e-12)

    def test_other_parameters(self):
        grid = Grid1D.new(half_length=default_half_length(5.0, 1.0), node_count=1024)
        wave = compute_soliton(5.0, 1.0, grid)
        assert np.max(wave.profile) == pytest.approx(3.0, abs=1e-10)
        assert wave.decay_rate == pytest.approx(np.sqrt(3 / 5), rel=0.01)

    @pytest.mark.parametrize(('speed', 'kappa'), [(2.0, 1.0), (1.5, 1.0), (3.0, 0.0), (3.0, -1.0)])
    def test_rejects_parameters_without_smooth_wave(self, speed, kappa):
        grid = Grid1D.new(half_length=50.0, node_count=256)
        with pytest.raises(ParameterError):
            compute_soliton(speed, kappa, grid)

    def test_rejects_short_grid(self):
        grid = Grid1D.new(half_length=10.0, node_count=256)
        with pytest.raises(ResolutionError, match='boundary'):
            compute_soliton(3.0, 1.0, grid)

    def test_rejects_coarse_grid(self):
        grid = Grid1D.new(half_length=default_half_length(3.0, 1.0), node_count=32)
        with pytest.raises(ResolutionError, match='residual'):
            compute_soliton(3.0, 1.0, grid)


class TestTravelingWaveResidual:
    def test_perturbed_profile_has_large_residual(self, wave):
        perturbed_profile = wave.profile + 1e-3 / np.cosh(wave.grid.nodes)
        perturbed_wave = SolitaryWave.new(speed=3.0, kappa=1.0, grid=wave.grid, profile=perturbed_profile)
        assert traveling_wave_residual(perturbed_wave) > 1e-4

    def test_zero_profile_has_zero_residual(self, fine_grid):
        zero_wave = SolitaryWave.new(speed=3.0, kappa=1.0, grid=fine_grid, profile=np.zeros(fine_grid.shape))
        assert traveling_wave_residual(zero_wave) == 0


class TestPropertiesReport:
    def test_concavity_threshold(self, wave):
        report = properties_report(wave)
        assert report.concavity_threshold == pytest.approx(2.5 - np.sqrt(3.25), abs=1e-12)
        assert report.concavity_threshold == pytest.approx(0.69722, abs=1e-5)

    def test_second_derivative_signs(self, wave):
        report = properties_report(wave)
        assert report.peak_second_derivative < 0
        assert report.tail_second_derivative > 0

    def test_all_verdicts_pass(self, wave):
        report = properties_report(wave)
        assert report.is_even
        assert report.is_monotone
        assert report.concavity_matches
        assert report.passed

    def test_impulse_matches_direct_quadrature(self, wave):
        report = properties_report(wave)
        expected_impulse = 0.5 * np.sum(wave.profile ** 2 + wave.profile_derivative ** 2) * wave.grid.spacing
        assert report.impulse == pytest.approx(expected_impulse, rel=1e-12)
        assert report.impulse > 0
        assert report.hamiltonian < 0


def test_export_soliton_csv(wave, tmp_path):
    path = export_soliton_csv(wave, tmp_path / 'soliton.csv')
    data_frame = pd.read_csv(path)
    assert list(data_frame.columns) == ['x', 'Q', 'Q_x', 'Q_xx']
    assert len(data_frame) == wave.grid.node_count
