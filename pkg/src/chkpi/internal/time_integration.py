"""
Fourth order exponential time differencing (ETDRK4) for ∂t u = A u + N(u, t), where A is diagonal in Fourier space.
The φ-function weights are evaluated as means over a small circle around each point of the spectrum, which keeps
them accurate where the symbol is close to zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, NamedTuple

import numpy as np
import numpy.typing as npt
from public import public
from typing_extensions import Self

from chkpi.internal.errors import StabilityError

if TYPE_CHECKING:
    from collections.abc import Iterator

# The classical fourth order Runge–Kutta region reaches 2√2 on the imaginary axis.
STABILITY_LIMIT = 2.8
DEFAULT_STABILITY_FRACTION = 0.5
CONTOUR_POINT_COUNT = 32
CONTOUR_RADIUS = 1.0

NonlinearTerm = Callable[[npt.NDArray[np.complex128], float], npt.NDArray[np.complex128]]


@public
@dataclass(frozen=True)
class EtdRk4Coefficients:
    """
    The precomputed weights of one ETDRK4 step of fixed size.

    :ivar time_step: The step size dt.
    :ivar linear_symbol: The diagonal of A.
    :ivar exponential: e^{A dt}.
    :ivar half_exponential: e^{A dt/2}.
    :ivar stage_weight: The weight of the nonlinear term in the half step stages.
    :ivar first_weight: The final weight of the first nonlinear evaluation.
    :ivar middle_weight: The final weight of the two midpoint evaluations.
    :ivar last_weight: The final weight of the last nonlinear evaluation.
    """

    time_step: float
    linear_symbol: npt.NDArray[np.complex128]
    exponential: npt.NDArray[np.complex128]
    half_exponential: npt.NDArray[np.complex128]
    stage_weight: npt.NDArray[np.complex128]
    first_weight: npt.NDArray[np.complex128]
    middle_weight: npt.NDArray[np.complex128]
    last_weight: npt.NDArray[np.complex128]

    @classmethod
    def new(
            cls,
            *,
            linear_symbol: npt.NDArray[np.complex128],
            time_step: float,
            contour_point_count: int = CONTOUR_POINT_COUNT,
            contour_radius: float = CONTOUR_RADIUS,
    ) -> Self:
        """
        Computes the step weights for a diagonal linear part.

        :param linear_symbol: The diagonal of A in Fourier space.
        :param time_step: The step size.
        :param contour_point_count: The number of quadrature points on the circle around each z = A dt.
        :param contour_radius: The radius of that circle.
        :return: The coefficients.
        """
        if not time_step > 0:
            error_message = f'The time step must be positive, but {time_step} was given.'
            raise ValueError(error_message)
        linear_symbol = np.asarray(linear_symbol, dtype=np.complex128)
        scaled_symbol = time_step * linear_symbol
        circle = contour_radius * np.exp(2j * np.pi * (np.arange(1, contour_point_count + 1) - 0.5)
                                          / contour_point_count)
        contour = scaled_symbol[..., np.newaxis] + circle
        contour_exponential = np.exp(contour)
        stage_weight = time_step * np.mean((np.exp(contour / 2) - 1) / contour, axis=-1)
        first_weight = time_step * np.mean(
            (-4 - contour + contour_exponential * (4 - 3 * contour + contour ** 2)) / contour ** 3, axis=-1)
        middle_weight = time_step * np.mean(
            (2 + contour + contour_exponential * (contour - 2)) / contour ** 3, axis=-1)
        last_weight = time_step * np.mean(
            (-4 - 3 * contour - contour ** 2 + contour_exponential * (4 - contour)) / contour ** 3, axis=-1)
        return cls(
            time_step=float(time_step),
            linear_symbol=linear_symbol,
            exponential=np.exp(scaled_symbol),
            half_exponential=np.exp(scaled_symbol / 2),
            stage_weight=stage_weight,
            first_weight=first_weight,
            middle_weight=middle_weight,
            last_weight=last_weight,
        )


def etdrk4_step(
        coefficients: EtdRk4Coefficients,
        state: npt.NDArray[np.complex128],
        time: float,
        nonlinear: NonlinearTerm,
) -> tuple[npt.NDArray[np.complex128], npt.NDArray[np.complex128]]:
    """
    Advances the state by one step.

    :param coefficients: The step weights.
    :param state: The Fourier coefficients at the start of the step.
    :param time: The time at the start of the step.
    :param nonlinear: The explicit part N(u, t).
    :return: The state at the end of the step and N evaluated at the start of the step.
    """
    time_step = coefficients.time_step
    half_time = time + time_step / 2
    first_evaluation = nonlinear(state, time)
    first_stage = coefficients.half_exponential * state + coefficients.stage_weight * first_evaluation
    second_evaluation = nonlinear(first_stage, half_time)
    second_stage = coefficients.half_exponential * state + coefficients.stage_weight * second_evaluation
    third_evaluation = nonlinear(second_stage, half_time)
    third_stage = (coefficients.half_exponential * first_stage
                   + coefficients.stage_weight * (2 * third_evaluation - first_evaluation))
    fourth_evaluation = nonlinear(third_stage, time + time_step)
    next_state = (coefficients.exponential * state
                  + coefficients.first_weight * first_evaluation
                  + 2 * coefficients.middle_weight * (second_evaluation + third_evaluation)
                  + coefficients.last_weight * fourth_evaluation)
    return next_state, first_evaluation


def check_time_step(time_step: float, stiffness_bound: float):
    """
    Raises if the explicit part is too stiff for the step size.

    :param time_step: The step size.
    :param stiffness_bound: A bound on the spectral radius of the linearization of the explicit part.
    :raises StabilityError: If dt times the bound exceeds the stability limit.
    """
    if time_step * stiffness_bound > STABILITY_LIMIT:
        error_message = (f'The time step {time_step:.4g} times the explicit stiffness bound {stiffness_bound:.4g} is '
                         f'{time_step * stiffness_bound:.3f}, above the stability limit {STABILITY_LIMIT}.')
        raise StabilityError(error_message)


def default_time_step(stiffness_bound: float) -> float:
    """The default step size 0.5/B for an explicit stiffness bound B."""
    return DEFAULT_STABILITY_FRACTION / stiffness_bound


def step_count_for(final_time: float, time_step: float) -> int:
    """The number of whole steps needed to reach at least the final time."""
    return int(np.ceil(final_time / time_step - 1e-9))


def is_sample_step(step_index: int, step_count: int, sample_stride: int) -> bool:
    """Whether the state after `step_index` steps is recorded: every `sample_stride` steps, and always the last."""
    return step_index % sample_stride == 0 or step_index == step_count


def sample_step_indexes(step_count: int, sample_stride: int) -> npt.NDArray[np.int64]:
    """The step indexes recorded by a run of `step_count` steps, starting with the initial state."""
    if sample_stride < 1:
        error_message = f'The sample stride must be at least 1, but {sample_stride} was given.'
        raise ValueError(error_message)
    indexes = np.arange(0, step_count + 1, sample_stride)
    if indexes[-1] != step_count:
        indexes = np.append(indexes, step_count)
    return indexes


class IntegrationSample(NamedTuple):
    step_index: int
    time: float
    state: npt.NDArray[np.complex128]
    derivative: npt.NDArray[np.complex128]


def integrate(
        coefficients: EtdRk4Coefficients,
        state: npt.NDArray[np.complex128],
        step_count: int,
        nonlinear: NonlinearTerm,
        *,
        sample_stride: int = 1,
        start_time: float = 0.0,
        after_step: Callable[[npt.NDArray[np.complex128], int], npt.NDArray[np.complex128]] | None = None,
) -> Iterator[IntegrationSample]:
    """
    Runs a fixed number of steps and yields the recorded states together with the right-hand side A u + N(u, t)
    evaluated at them, which serves as the time derivative of the discrete trajectory.

    :param coefficients: The step weights.
    :param state: The initial Fourier coefficients.
    :param step_count: The number of steps.
    :param nonlinear: The explicit part N(u, t).
    :param sample_stride: The number of steps between recorded states. The last state is always recorded.
    :param start_time: The time of the initial state.
    :param after_step: Called with each new state and its step index. It may check the state and return a modified
        state, which replaces it.
    :return: The recorded samples, starting with the initial state.
    """
    if sample_stride < 1:
        error_message = f'The sample stride must be at least 1, but {sample_stride} was given.'
        raise ValueError(error_message)
    for step_index in range(step_count + 1):
        time = start_time + step_index * coefficients.time_step
        if step_index == step_count:
            if is_sample_step(step_index, step_count, sample_stride):
                derivative = coefficients.linear_symbol * state + nonlinear(state, time)
                yield IntegrationSample(step_index, time, state, derivative)
            break
        next_state, evaluation = etdrk4_step(coefficients, state, time, nonlinear)
        if is_sample_step(step_index, step_count, sample_stride):
            yield IntegrationSample(step_index, time, state, coefficients.linear_symbol * state + evaluation)
        if after_step is not None:
            next_state = after_step(next_state, step_index + 1)
        state = next_state
