"""
The Camassa–Holm solitary wave Q_c and its diagnostics.

With a = c − 2κ, integrating the traveling wave equation twice against decaying tails gives the first integral
(Q′)² = Q²(a − Q)/(c − Q). Its quadrature from the peak is available in closed form, so the profile is obtained by
inverting x(Q) node by node.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt
import pandas as pd
import scipy.optimize
from public import public
from typing_extensions import Self

from chkpi.internal.errors import ParameterError, ResolutionError
from chkpi.internal.grid import Grid1D
from chkpi.internal.spectral_field import SpectralField
from chkpi.internal.spectral_operations import quadrature, x_derivative, x_second_derivative

logger = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-13
DEFAULT_RESIDUAL_TOLERANCE = 1e-6
TAIL_FIT_WINDOW = (1e-8, 1e-4)
BRACKET_EXPANSION = 50.0


def validate_parameters(speed: float, kappa: float):
    """
    Checks that a smooth solitary wave exists for the parameters.

    :param speed: The wave speed c.
    :param kappa: The parameter κ.
    :raises ParameterError: If κ ≤ 0 or c ≤ 2κ.
    """
    if not kappa > 0:
        error_message = f'A smooth solitary wave requires κ > 0, but κ = {kappa} was given.'
        raise ParameterError(error_message)
    if not speed > 2 * kappa:
        error_message = f'A smooth solitary wave requires c > 2κ, but c = {speed} and κ = {kappa} were given.'
        raise ParameterError(error_message)


def predicted_decay_rate(speed: float, kappa: float) -> float:
    """The exponential decay rate √(1 − 2κ/c) of the profile tails."""
    return float(np.sqrt(1 - 2 * kappa / speed))


def default_half_length(speed: float, kappa: float) -> float:
    """The default half length 40/√(1 − 2κ/c) of the periodic x-interval."""
    return 40.0 / predicted_decay_rate(speed, kappa)


def position_of_log_height(log_height: float, speed: float, kappa: float) -> float:
    """
    The distance from the peak at which the profile takes the value Q = exp(`log_height`), for 0 < Q ≤ c − 2κ.

    Written in terms of log Q so the far tail, where Q underflows, stays accurate.
    """
    amplitude = speed - 2 * kappa
    height = np.exp(log_height)
    gap = max(amplitude - height, 0.0)
    z = np.sqrt(gap * speed / (amplitude * (speed - height)))
    log_ratio = np.log(2 * kappa) + log_height - np.log(amplitude) - np.log(speed - height)
    first_term = 2 * np.sqrt(speed / amplitude) * (np.log1p(z) - 0.5 * log_ratio)
    second_term = 2 * np.log((np.sqrt(gap) + np.sqrt(speed - height)) / np.sqrt(2 * kappa))
    return float(first_term - second_term)


def profile_height_at(distance: float, speed: float, kappa: float) -> float:
    """
    Inverts `position_of_log_height` for a single distance from the peak.

    :param distance: The distance |x| from the peak.
    :param speed: The wave speed c.
    :param kappa: The parameter κ.
    :return: The profile value Q(x).
    """
    amplitude = speed - 2 * kappa
    if distance == 0:
        return amplitude
    upper = np.log(amplitude)
    lower = upper - BRACKET_EXPANSION
    while position_of_log_height(lower, speed, kappa) <= distance:
        lower -= BRACKET_EXPANSION
    log_height = scipy.optimize.brentq(
        lambda log_height_: position_of_log_height(log_height_, speed, kappa) - distance,
        lower, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(np.exp(log_height))


@public
@dataclass(frozen=True)
class SolitaryWave:
    """
    A sampled solitary wave profile with spectrally computed derivatives.

    :ivar speed: The wave speed c.
    :ivar kappa: The parameter κ.
    :ivar grid: The grid the profile is sampled on.
    :ivar profile: The samples of Q.
    :ivar profile_derivative: The samples of Q′.
    :ivar profile_second_derivative: The samples of Q″.
    :ivar decay_rate: The decay rate fitted to the sampled tail.
    """

    speed: float
    kappa: float
    grid: Grid1D
    profile: npt.NDArray[np.float64]
    profile_derivative: npt.NDArray[np.float64]
    profile_second_derivative: npt.NDArray[np.float64]
    decay_rate: float

    @classmethod
    def new(
            cls,
            *,
            speed: float,
            kappa: float,
            grid: Grid1D,
            profile: npt.NDArray[np.float64],
    ) -> Self:
        """
        Creates a solitary wave from profile samples. The derivatives and the tail decay rate are computed from the
        samples.

        :param speed: The wave speed c.
        :param kappa: The parameter κ.
        :param grid: The grid the profile is sampled on.
        :param profile: The samples of Q.
        :return: The solitary wave.
        """
        field = SpectralField.new(grid=grid, values=profile)
        return cls(
            speed=float(speed),
            kappa=float(kappa),
            grid=grid,
            profile=field.values,
            profile_derivative=x_derivative(field).values,
            profile_second_derivative=x_second_derivative(field).values,
            decay_rate=fit_tail_decay_rate(grid.nodes, field.values),
        )

    @property
    def amplitude(self) -> float:
        return self.speed - 2 * self.kappa

    @property
    def field(self) -> SpectralField:
        return SpectralField(grid=self.grid, values=self.profile)


def fit_tail_decay_rate(nodes: npt.NDArray[np.float64], profile: npt.NDArray[np.float64]) -> float:
    """
    Fits the decay rate of the profile tail by least squares on log Q where Q ∈ [1e−8, 1e−4] and x > 0.

    :param nodes: The grid nodes.
    :param profile: The profile samples.
    :return: The fitted rate, or NaN if the window holds fewer than two samples.
    """
    window = (nodes > 0) & (profile >= TAIL_FIT_WINDOW[0]) & (profile <= TAIL_FIT_WINDOW[1])
    if np.count_nonzero(window) < 2:
        return float('nan')
    slope, _ = np.polyfit(nodes[window], np.log(profile[window]), deg=1)
    return float(-slope)


def compute_soliton(
        speed: float,
        kappa: float,
        grid: Grid1D,
        *,
        residual_tolerance: float = DEFAULT_RESIDUAL_TOLERANCE,
        tail_tolerance: float = TAIL_TOLERANCE,
) -> SolitaryWave:
    """
    Computes the solitary wave profile on a grid.

    :param speed: The wave speed c.
    :param kappa: The parameter κ.
    :param grid: The grid. The wave peak is placed at x = 0.
    :param residual_tolerance: The largest accepted traveling wave residual.
    :param tail_tolerance: The largest accepted profile value at the grid boundary.
    :return: The solitary wave.
    :raises ParameterError: If the parameters admit no smooth solitary wave.
    :raises ResolutionError: If the grid is too short for the tails or too coarse for the residual tolerance.
    """
    validate_parameters(speed, kappa)
    distances = np.abs(grid.nodes)
    unique_distances, inverse_indexes = np.unique(distances, return_inverse=True)
    unique_heights = np.array([profile_height_at(distance, speed, kappa) for distance in unique_distances])
    profile = unique_heights[inverse_indexes]
    boundary_height = profile[0]
    if boundary_height > tail_tolerance:
        error_message = (f'The profile reaches {boundary_height:.3e} at the boundary of a grid with half length '
                         f'{grid.half_length}. A half length of at least {default_half_length(speed, kappa):.1f} '
                         f'is needed.')
        raise ResolutionError(error_message)
    wave = SolitaryWave.new(speed=speed, kappa=kappa, grid=grid, profile=profile)
    residual = traveling_wave_residual(wave)
    if residual > residual_tolerance:
        error_message = (f'The traveling wave residual {residual:.3e} exceeds {residual_tolerance:.1e} with '
                         f'{grid.node_count} nodes.')
        raise ResolutionError(error_message)
    logger.debug(f'Solitary wave for c={speed}, κ={kappa} computed with residual {residual:.3e}.')
    return wave


def stationary_gradient(
        profile: npt.NDArray[np.float64],
        profile_derivative: npt.NDArray[np.float64],
        profile_second_derivative: npt.NDArray[np.float64],
        speed: float,
        kappa: float,
) -> npt.NDArray[np.float64]:
    """
    The variational derivative of 𝓗 + c𝒬 at a y-independent state,
    ½u_x² + uu_xx − 2κu − (3/2)u² + c(u − u_xx).
    """
    return (0.5 * profile_derivative ** 2 + profile * profile_second_derivative - 2 * kappa * profile
            - 1.5 * profile ** 2 + speed * (profile - profile_second_derivative))


def traveling_wave_residual(wave: SolitaryWave) -> float:
    """
    The max norm of the variational derivative of 𝓗 + c𝒬 at the profile, which vanishes exactly at a solitary wave.

    :param wave: The solitary wave.
    :return: The residual.
    """
    gradient = stationary_gradient(wave.profile, wave.profile_derivative, wave.profile_second_derivative,
                                   wave.speed, wave.kappa)
    return float(np.max(np.abs(gradient)))


def first_integral_residual(wave: SolitaryWave) -> float:
    """The max norm of (Q′)² − Q²(a − Q)/(c − Q)."""
    profile = wave.profile
    expected = profile ** 2 * (wave.amplitude - profile) / (wave.speed - profile)
    return float(np.max(np.abs(wave.profile_derivative ** 2 - expected)))


def concavity_threshold(speed: float, kappa: float) -> float:
    """The profile value c − κ/2 − √(cκ + κ²/4) below which the profile is convex."""
    return float(speed - kappa / 2 - np.sqrt(speed * kappa + kappa ** 2 / 4))


def impulse(wave: SolitaryWave) -> float:
    """The impulse ½∫(Q² + Q′²) per unit transverse length."""
    return 0.5 * quadrature(SpectralField(grid=wave.grid, values=wave.profile ** 2 + wave.profile_derivative ** 2))


def hamiltonian(wave: SolitaryWave) -> float:
    """The Hamiltonian −½∫(Q³ + QQ′² + 2κQ²) per unit transverse length."""
    profile = wave.profile
    integrand = profile ** 3 + profile * wave.profile_derivative ** 2 + 2 * wave.kappa * profile ** 2
    return -0.5 * quadrature(SpectralField(grid=wave.grid, values=integrand))


@public
@dataclass(frozen=True)
class PropertyReport:
    """
    Verdicts on the qualitative properties of a computed solitary wave.

    :ivar evenness_error: The largest value of |Q(x) − Q(−x)|.
    :ivar is_even: Whether the evenness error is below 1e−10.
    :ivar monotonicity_violation: The largest increase of Q between consecutive nodes with x > 0.
    :ivar is_monotone: Whether the profile is nonincreasing on x > 0 down to grid tolerance.
    :ivar peak_height: The value Q(0).
    :ivar peak_error: The difference between Q(0) and c − 2κ.
    :ivar decay_rate: The fitted tail decay rate.
    :ivar predicted_decay_rate: The rate √(1 − 2κ/c).
    :ivar decay_rate_relative_error: The relative difference of the two rates.
    :ivar concavity_threshold: The value c − κ/2 − √(cκ + κ²/4).
    :ivar concavity_matches: Whether Q″ < 0 exactly where Q lies above the threshold, away from the threshold.
    :ivar peak_second_derivative: The value Q″(0).
    :ivar tail_second_derivative: The value of Q″ at the node where Q first drops below 1e−4 on x > 0.
    :ivar impulse: The impulse of the wave.
    :ivar hamiltonian: The Hamiltonian of the wave.
    :ivar traveling_wave_residual: The traveling wave residual.
    :ivar first_integral_residual: The max norm residual of the first integral.
    """

    evenness_error: float
    is_even: bool
    monotonicity_violation: float
    is_monotone: bool
    peak_height: float
    peak_error: float
    decay_rate: float
    predicted_decay_rate: float
    decay_rate_relative_error: float
    concavity_threshold: float
    concavity_matches: bool
    peak_second_derivative: float
    tail_second_derivative: float
    impulse: float
    hamiltonian: float
    traveling_wave_residual: float
    first_integral_residual: float

    @property
    def passed(self) -> bool:
        return (self.is_even and self.is_monotone and abs(self.peak_error) < 1e-10
                and self.decay_rate_relative_error < 0.01 and self.concavity_matches)


def properties_report(wave: SolitaryWave) -> PropertyReport:
    """
    Checks evenness, monotonicity, peak height, decay rate and the convexity transition of a solitary wave.

    :param wave: The solitary wave.
    :return: The report.
    """
    grid = wave.grid
    profile = wave.profile
    node_count = grid.node_count
    mirrored_profile = profile[(-np.arange(node_count)) % node_count]
    evenness_error = float(np.max(np.abs(profile - mirrored_profile)))
    peak_index = node_count // 2
    right_profile = profile[peak_index:]
    monotonicity_violation = float(max(np.max(np.diff(right_profile)), 0.0))
    peak_height = float(profile[peak_index])
    rate = predicted_decay_rate(wave.speed, wave.kappa)
    threshold = concavity_threshold(wave.speed, wave.kappa)
    grid_tolerance = np.max(np.abs(wave.profile_derivative)) * grid.spacing
    away_from_transition = np.abs(profile - threshold) > grid_tolerance
    away_from_transition &= profile > TAIL_FIT_WINDOW[0]
    expected_concave = profile > threshold
    actually_concave = wave.profile_second_derivative < 0
    concavity_matches = bool(np.all(expected_concave[away_from_transition] == actually_concave[away_from_transition]))
    tail_index = peak_index + int(np.argmax(right_profile < TAIL_FIT_WINDOW[1]))
    return PropertyReport(
        evenness_error=evenness_error,
        is_even=evenness_error < 1e-10,
        monotonicity_violation=monotonicity_violation,
        is_monotone=monotonicity_violation < 1e-12,
        peak_height=peak_height,
        peak_error=peak_height - wave.amplitude,
        decay_rate=wave.decay_rate,
        predicted_decay_rate=rate,
        decay_rate_relative_error=abs(wave.decay_rate - rate) / rate,
        concavity_threshold=threshold,
        concavity_matches=concavity_matches,
        peak_second_derivative=float(wave.profile_second_derivative[peak_index]),
        tail_second_derivative=float(wave.profile_second_derivative[tail_index]),
        impulse=impulse(wave),
        hamiltonian=hamiltonian(wave),
        traveling_wave_residual=traveling_wave_residual(wave),
        first_integral_residual=first_integral_residual(wave),
    )


def export_soliton_csv(wave: SolitaryWave, path: Path) -> Path:
    """
    Writes the profile and its derivatives as CSV columns `x, Q, Q_x, Q_xx`.

    :param wave: The solitary wave.
    :param path: The output path.
    :return: The output path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data_frame = pd.DataFrame({
        'x': wave.grid.nodes,
        'Q': wave.profile,
        'Q_x': wave.profile_derivative,
        'Q_xx': wave.profile_second_derivative,
    })
    data_frame.to_csv(path, index=False)
    return path
