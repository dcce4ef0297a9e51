import numpy as np
import pytest

from chkpi.internal.grid import Grid1D, Grid2D
from chkpi.internal.multiplier import SKEW, Y_SECOND_DERIVATIVE, constant_coefficient_multiplier


class TestGrid1D:
    def test_nodes_are_uniformly_spaced(self):
        grid = Grid1D.new(half_length=5.0, node_count=64)
        assert np.allclose(np.diff(grid.nodes), 10.0 / 64)
        assert grid.nodes[0] == -5.0

    def test_wavenumbers_are_symmetric_except_nyquist(self):
        grid = Grid1D.new(half_length=np.pi, node_count=16)
        wavenumbers = np.sort(grid.wavenumbers)
        assert wavenumbers[0] == -8
        assert np.allclose(wavenumbers[1:], -wavenumbers[1:][::-1])

    def test_odd_wavenumbers_drop_nyquist(self):
        grid = Grid1D.new(half_length=np.pi, node_count=16)
        assert grid.odd_wavenumbers[8] == 0
        assert np.count_nonzero(grid.odd_wavenumbers) == 14

    @pytest.mark.parametrize('node_count', [4, 12, 100])
    def test_rejects_invalid_node_counts(self, node_count):
        with pytest.raises(ValueError, match='power of two'):
            Grid1D.new(half_length=1.0, node_count=node_count)

    def test_decay_rate_half_length(self):
        grid = Grid1D.for_decay_rate(decay_rate=0.5, node_count=64)
        assert grid.half_length == 80.0


class TestGrid2D:
    def test_period_matches_base_frequency(self):
        grid = Grid2D.new(x_grid=Grid1D.new(half_length=1.0, node_count=8), base_frequency=0.7, node_count=8)
        assert grid.period * grid.base_frequency == pytest.approx(2 * np.pi, rel=1e-15)

    def test_rejects_odd_transverse_node_count(self):
        with pytest.raises(ValueError, match='even'):
            Grid2D.new(x_grid=Grid1D.new(half_length=1.0, node_count=8), base_frequency=1.0, node_count=7)

    def test_rejects_underresolved_transverse_mode(self):
        with pytest.raises(ValueError, match='cannot resolve'):
            Grid2D.new(x_grid=Grid1D.new(half_length=1.0, node_count=8), base_frequency=1.0, node_count=8,
                       maximum_resolved_mode=3)

    def test_transverse_row_of_negative_mode(self):
        grid = Grid2D.new(x_grid=Grid1D.new(half_length=1.0, node_count=8), base_frequency=1.0, node_count=8)
        assert grid.transverse_row(-1) == 7
        assert grid.mode_indices[grid.transverse_row(-3)] == -3


class TestMultiplierSymbols:
    @pytest.mark.parametrize('multiplier', [SKEW, Y_SECOND_DERIVATIVE, constant_coefficient_multiplier(3.0, 1.0)])
    def test_real_operator_symbols_are_hermitian(self, multiplier):
        xi = np.linspace(0.1, 5.0, 20)
        eta = np.full_like(xi, 0.8)
        assert np.allclose(multiplier.evaluate(-xi, eta), np.conj(multiplier.evaluate(xi, eta)))

    def test_odd_symbol_vanishes_at_zero_mode(self):
        values = SKEW.evaluate(np.array([0.0, 1.0]), np.zeros(2))
        assert values[0] == 0
        assert values[1] == pytest.approx(0.5j)
