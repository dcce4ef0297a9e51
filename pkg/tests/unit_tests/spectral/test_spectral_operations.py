"""Tests for the spectral field operations."""
import numpy as np
import pytest

from chkpi.internal.errors import NonzeroMeanError
from chkpi.internal.grid import Grid1D, Grid2D
from chkpi.internal.spectral_field import SpectralField
from chkpi.internal.spectral_operations import (
    apply_J,
    dealias,
    helmholtz_inverse,
    inner_product,
    sobolev_norm,
    x_antiderivative2,
    x_derivative,
    x_second_derivative,
    y_derivative2,
)


def smooth_random_field(grid, seed: int, mean_free: bool = True) -> SpectralField:
    random_generator = np.random.default_rng(seed)
    coefficients = np.zeros(grid.shape, dtype=np.complex128)
    low_modes = np.abs(grid.x_mode_index_mesh) <= 6
    low_modes = low_modes & (np.abs(grid.transverse_mode_index_mesh) <= 3)
    noise = random_generator.normal(size=grid.shape) + 1j * random_generator.normal(size=grid.shape)
    coefficients = np.where(low_modes, noise, coefficients)
    values = SpectralField.from_coefficients(grid=grid, coefficients=coefficients).values
    if mean_free:
        values = values - values.mean(axis=-1, keepdims=True)
    return SpectralField.new(grid=grid, values=values / np.max(np.abs(values)))


class TestSpectralOperations:
    @pytest.fixture
    def grid(self) -> Grid1D:
        """
        A grid on [-π, π), so the wavenumbers are the integers.

        :return: The grid.
        """
        return Grid1D.new(half_length=np.pi, node_count=32)

    def test_helmholtz_inverse_of_cosine(self, grid):
        field = SpectralField.new(grid=grid, values=np.cos(grid.nodes))
        result = helmholtz_inverse(field)
        assert np.allclose(result.values, np.cos(grid.nodes) / 2, atol=1e-14)

    def test_helmholtz_inverse_keeps_constants(self, grid):
        field = SpectralField.new(grid=grid, values=np.ones(grid.shape))
        result = helmholtz_inverse(field)
        assert np.allclose(result.values, 1.0, atol=1e-14)

    def test_helmholtz_inverse_is_inverted_by_forward_operator(self, grid):
        field = smooth_random_field(grid, seed=0, mean_free=False)
        result = helmholtz_inverse(field)
        forward = result - x_second_derivative(result)
        assert np.max(np.abs(forward.values - field.values)) < 1e-10

    def test_apply_J_of_sine(self, grid):
        field = SpectralField.new(grid=grid, values=np.sin(grid.nodes))
        result = apply_J(field)
        assert np.allclose(result.values, np.cos(grid.nodes) / 2, atol=1e-14)

    def test_apply_J_annihilates_constants(self, grid):
        field = SpectralField.new(grid=grid, values=np.ones(grid.shape))
        result = apply_J(field)
        assert np.allclose(result.values, 0.0, atol=1e-15)

    def test_apply_J_is_skew(self, grid):
        first = smooth_random_field(grid, seed=1, mean_free=False)
        second = smooth_random_field(grid, seed=2, mean_free=False)
        assert inner_product(apply_J(first), first) == pytest.approx(0, abs=1e-12)
        skew_sum = inner_product(apply_J(first), second) + inner_product(first, apply_J(second))
        assert skew_sum == pytest.approx(0, abs=1e-12)

    def test_apply_J_is_helmholtz_inverse_of_derivative(self, grid):
        field = smooth_random_field(grid, seed=3)
        assert np.allclose(apply_J(field).values, helmholtz_inverse(x_derivative(field)).values, atol=1e-13)

    def test_regularized_apply_J_reduces_to_apply_J(self, grid):
        field = smooth_random_field(grid, seed=4)
        assert np.array_equal(apply_J(field, epsilon=0.0).values, apply_J(field).values)
        regularized = apply_J(field, epsilon=0.1)
        assert not np.allclose(regularized.values, apply_J(field).values)

    def test_x_antiderivative2_of_cosine(self, grid):
        field = SpectralField.new(grid=grid, values=np.cos(grid.nodes))
        result = x_antiderivative2(field)
        assert np.allclose(result.values, -np.cos(grid.nodes), atol=1e-14)

    def test_x_antiderivative2_of_double_frequency_sine(self, grid):
        field = SpectralField.new(grid=grid, values=np.sin(2 * grid.nodes))
        result = x_antiderivative2(field)
        assert np.allclose(result.values, -np.sin(2 * grid.nodes) / 4, atol=1e-14)

    def test_x_antiderivative2_rejects_nonzero_mean(self, grid):
        field = SpectralField.new(grid=grid, values=np.cos(grid.nodes) + 0.1)
        with pytest.raises(NonzeroMeanError):
            x_antiderivative2(field)

    def test_x_antiderivative2_can_drop_nonzero_mean(self, grid):
        field = SpectralField.new(grid=grid, values=np.cos(grid.nodes) + 0.1)
        result = x_antiderivative2(field, zero_nonzero_mean=True)
        assert np.allclose(result.values, -np.cos(grid.nodes), atol=1e-14)

    def test_x_antiderivative2_inverts_second_derivative(self, grid):
        field = smooth_random_field(grid, seed=5)
        result = x_antiderivative2(x_derivative(x_derivative(field)))
        assert np.max(np.abs(result.values - field.values)) < 1e-12

    def test_dealias_keeps_low_modes(self, grid):
        field = SpectralField.new(grid=grid, values=np.cos(3 * grid.nodes) + np.sin(10 * grid.nodes))
        assert np.allclose(dealias(field).values, field.values, atol=1e-14)

    def test_dealias_removes_nyquist_mode(self, grid):
        field = SpectralField.new(grid=grid, values=np.cos(16 * grid.nodes))
        assert np.allclose(dealias(field).values, 0.0, atol=1e-15)

    def test_dealias_is_idempotent(self, grid):
        random_generator = np.random.default_rng(6)
        field = SpectralField.new(grid=grid, values=random_generator.normal(size=grid.shape))
        once = dealias(field)
        assert np.allclose(dealias(once).values, once.values, atol=1e-15)

    def test_sobolev_norm_of_sine(self, grid):
        field = SpectralField.new(grid=grid, values=np.sin(grid.nodes))
        assert sobolev_norm(field, 0) == pytest.approx(np.sqrt(np.pi), rel=1e-12)

    def test_sobolev_norm_of_zero_field(self, grid):
        assert sobolev_norm(SpectralField.zeros(grid), 1.5) == 0

    def test_first_order_sobolev_norm_of_cosine(self, grid):
        field = SpectralField.new(grid=grid, values=np.cos(2 * grid.nodes))
        assert sobolev_norm(field, 1) == pytest.approx(np.sqrt(5 * np.pi), rel=1e-12)

    def test_sobolev_norm_matches_quadrature(self, grid):
        field = smooth_random_field(grid, seed=7, mean_free=False)
        quadrature_norm_squared = inner_product(field, field)
        assert sobolev_norm(field, 0) ** 2 == pytest.approx(quadrature_norm_squared, rel=1e-10)


class TestTwoDimensionalOperations:
    @pytest.fixture
    def grid(self) -> Grid2D:
        x_grid = Grid1D.new(half_length=np.pi, node_count=32)
        return Grid2D.new(x_grid=x_grid, base_frequency=0.5, node_count=16)

    def test_y_derivative2_of_transverse_cosine(self, grid):
        y_nodes, x_nodes = np.meshgrid(grid.nodes, grid.x_grid.nodes, indexing='ij')
        field = SpectralField.new(grid=grid, values=np.cos(0.5 * y_nodes) * np.sin(x_nodes))
        result = y_derivative2(field)
        assert np.allclose(result.values, -0.25 * field.values, atol=1e-14)

    def test_x_antiderivative2_rejects_nonzero_mean_on_transverse_mode(self, grid):
        y_nodes, x_nodes = np.meshgrid(grid.nodes, grid.x_grid.nodes, indexing='ij')
        field = SpectralField.new(grid=grid, values=np.cos(0.5 * y_nodes) * (1 + np.sin(x_nodes)))
        with pytest.raises(NonzeroMeanError):
            x_antiderivative2(field)

    def test_dealias_truncates_transverse_modes(self, grid):
        y_nodes, x_nodes = np.meshgrid(grid.nodes, grid.x_grid.nodes, indexing='ij')
        field = SpectralField.new(grid=grid, values=np.cos(3.0 * y_nodes) * np.sin(x_nodes))
        assert np.allclose(dealias(field).values, 0.0, atol=1e-15)

    def test_apply_J_is_skew_in_two_dimensions(self, grid):
        first = smooth_random_field(grid, seed=8)
        second = smooth_random_field(grid, seed=9)
        skew_sum = inner_product(apply_J(first), second) + inner_product(first, apply_J(second))
        assert skew_sum == pytest.approx(0, abs=1e-11)

    def test_sobolev_norm_includes_transverse_wavenumbers(self, grid):
        y_nodes, x_nodes = np.meshgrid(grid.nodes, grid.x_grid.nodes, indexing='ij')
        field = SpectralField.new(grid=grid, values=np.cos(y_nodes) * np.cos(x_nodes))
        area = grid.area
        expected_norm = np.sqrt(3 * area / 4)
        assert sobolev_norm(field, 1) == pytest.approx(expected_norm, rel=1e-12)
