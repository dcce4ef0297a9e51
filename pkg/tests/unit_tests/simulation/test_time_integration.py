import numpy as np
import pytest

from chkpi.internal.errors import StabilityError
from chkpi.internal.time_integration import (
    EtdRk4Coefficients,
    check_time_step,
    default_time_step,
    integrate,
    sample_step_indexes,
    step_count_for,
)

SYMBOL = np.array([-2.0, 0.0, 1j, -0.5 + 3j])


def final_state(coefficients, state, step_count, nonlinear):
    return list(integrate(coefficients, state, step_count, nonlinear))[-1].state


def test_linear_part_is_exact():
    coefficients = EtdRk4Coefficients.new(linear_symbol=SYMBOL, time_step=0.1)
    initial_state = np.array([1.0, 2.0, 1.0 - 1j, 0.5], dtype=np.complex128)
    state = final_state(coefficients, initial_state, 20, lambda state, time: np.zeros_like(state))
    assert np.allclose(state, np.exp(2.0 * SYMBOL) * initial_state, rtol=1e-13, atol=1e-14)


def test_constant_forcing_is_exact():
    coefficients = EtdRk4Coefficients.new(linear_symbol=SYMBOL, time_step=0.25)
    forcing = np.array([1.0, 1.0, 0.5j, 2.0], dtype=np.complex128)
    state = final_state(coefficients, np.zeros(4, dtype=np.complex128), 8, lambda state, time: forcing)
    expected = np.where(SYMBOL == 0, 2.0 * forcing, (np.exp(2.0 * SYMBOL) - 1) / np.where(SYMBOL == 0, 1, SYMBOL)
                        * forcing)
    assert np.allclose(state, expected, rtol=1e-12, atol=1e-13)


def test_fourth_order_convergence():
    def logistic_error(time_step: float) -> float:
        coefficients = EtdRk4Coefficients.new(linear_symbol=np.array([-1.0]), time_step=time_step)
        step_count = step_count_for(2.0, time_step)
        state = final_state(coefficients, np.array([0.5 + 0j]), step_count, lambda state, time: state ** 2)
        return float(abs(state[0] - 1 / (1 + np.exp(2.0))))

    ratio = logistic_error(0.2) / logistic_error(0.1)
    assert ratio > 12


def test_samples_at_stride_and_end():
    coefficients = EtdRk4Coefficients.new(linear_symbol=np.array([-1.0]), time_step=0.1)
    samples = list(integrate(coefficients, np.array([1.0 + 0j]), 7, lambda state, time: np.zeros_like(state),
                             sample_stride=3))
    assert [sample.step_index for sample in samples] == [0, 3, 6, 7]
    assert samples[-1].time == pytest.approx(0.7)
    for sample in samples:
        assert np.allclose(sample.derivative, -sample.state)


def test_after_step_replaces_state():
    coefficients = EtdRk4Coefficients.new(linear_symbol=np.array([0.0]), time_step=0.1)
    forcing = np.array([1.0 + 0j])
    samples = list(integrate(coefficients, np.array([0j]), 3, lambda state, time: forcing,
                             after_step=lambda state, step_index: np.zeros_like(state)))
    assert np.allclose(samples[-1].state, 0)


def test_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        EtdRk4Coefficients.new(linear_symbol=SYMBOL, time_step=0.0)


def test_time_step_check():
    check_time_step(0.5, 5.0)
    with pytest.raises(StabilityError):
        check_time_step(1.0, 3.0)


def test_default_time_step():
    assert default_time_step(4.0) == pytest.approx(0.125)


@pytest.mark.parametrize(('final_time', 'time_step', 'expected'), [(1.0, 0.1, 10), (1.05, 0.1, 11), (0.0, 0.1, 0)])
def test_step_count_for(final_time, time_step, expected):
    assert step_count_for(final_time, time_step) == expected


def test_sample_step_indexes():
    assert sample_step_indexes(7, 3).tolist() == [0, 3, 6, 7]
    assert sample_step_indexes(6, 3).tolist() == [0, 3, 6]
    with pytest.raises(ValueError):
        sample_step_indexes(6, 0)
