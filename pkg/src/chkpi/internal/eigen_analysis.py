"""
Eigenvalue problems of the linearized flow: the spectrum of H_c, the leading eigenpair of 𝒥𝓛(k), and scans of the
unstable branch over k.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
import pandas as pd
import scipy.linalg
import scipy.optimize
from public import public

from chkpi.internal.errors import ConvergenceError
from chkpi.internal.operator_matrix import LinearizedOperators, assemble_Hc
from chkpi.internal.solitary_wave import SolitaryWave

logger = logging.getLogger(__name__)

DEFAULT_GROWTH_TOLERANCE = 1e-6
SPECTRAL_ZERO_TOLERANCE = 1e-6
EDGE_TOLERANCE = 1e-10


@public
@dataclass(frozen=True)
class HcSpectrum:
    """
    A summary of the spectrum of H_c.

    :ivar eigenvalues: The ascending eigenvalues.
    :ivar negative_count: The number of eigenvalues below −1e−6.
    :ivar kernel_count: The number of eigenvalues of magnitude below 1e−6.
    :ivar negative_eigenvalue: The smallest eigenvalue.
    :ivar kernel_eigenvalue: The eigenvalue closest to zero.
    :ivar kernel_cosine: The cosine similarity between the kernel eigenvector and φ′.
    :ivar smallest_positive_eigenvalue: The smallest eigenvalue above 1e−6.
    """

    eigenvalues: npt.NDArray[np.float64]
    negative_count: int
    kernel_count: int
    negative_eigenvalue: float
    kernel_eigenvalue: float
    kernel_cosine: float
    smallest_positive_eigenvalue: float


def hc_spectrum(wave: SolitaryWave) -> HcSpectrum:
    """
    Computes the spectrum of H_c and checks that its kernel is spanned by the translation mode φ′.

    :param wave: The solitary wave.
    :return: The spectrum summary.
    """
    operator = assemble_Hc(wave)
    eigenvalues, eigenvectors = scipy.linalg.eigh(operator.matrix)
    kernel_index = int(np.argmin(np.abs(eigenvalues)))
    translation_mode = operator.basis.analyze(wave.profile_derivative)
    kernel_cosine = abs(eigenvectors[:, kernel_index] @ translation_mode) / np.linalg.norm(translation_mode)
    positive_eigenvalues = eigenvalues[eigenvalues > SPECTRAL_ZERO_TOLERANCE]
    return HcSpectrum(
        eigenvalues=eigenvalues,
        negative_count=int(np.count_nonzero(eigenvalues < -SPECTRAL_ZERO_TOLERANCE)),
        kernel_count=int(np.count_nonzero(np.abs(eigenvalues) < SPECTRAL_ZERO_TOLERANCE)),
        negative_eigenvalue=float(eigenvalues[0]),
        kernel_eigenvalue=float(eigenvalues[kernel_index]),
        kernel_cosine=float(kernel_cosine),
        smallest_positive_eigenvalue=float(positive_eigenvalues[0]),
    )


@public
@dataclass(frozen=True)
class Eigenpair:
    """
    An eigenpair of 𝒥𝓛(k).

    :ivar wavenumber: The transverse wavenumber k.
    :ivar growth_rate: The eigenvalue σ.
    :ivar profile: The eigenfunction on the grid nodes, with unit L² norm.
    :ivar residual: The relative residual ‖σU − 𝒥𝓛(k)U‖/‖U‖.
    """

    wavenumber: float
    growth_rate: complex
    profile: npt.NDArray[np.complex128]
    residual: float


def orient_profile(profile: npt.NDArray[np.complex128], spacing: float) -> npt.NDArray[np.complex128]:
    """
    Scales a profile to unit L² norm and rotates its phase so the value at x = 0 is real and positive, or the largest
    value when the profile nearly vanishes at x = 0.
    """
    profile = profile / np.sqrt(np.sum(np.abs(profile) ** 2) * spacing)
    center_value = profile[profile.shape[0] // 2]
    if abs(center_value) < 1e-8 * np.max(np.abs(profile)):
        center_value = profile[int(np.argmax(np.abs(profile)))]
    return profile * (abs(center_value) / center_value)


def leading_eigenpair(operators: LinearizedOperators, wavenumber: float) -> Eigenpair:
    """
    Computes the eigenpair of 𝒥𝓛(k) whose eigenvalue has the largest real part.

    :param operators: The linearized operators.
    :param wavenumber: The transverse wavenumber k.
    :return: The eigenpair.
    :raises ConvergenceError: If the dense eigensolve fails.
    """
    generator = operators.generator(wavenumber)
    try:
        eigenvalues, eigenvectors = scipy.linalg.eig(generator, check_finite=True)
    except (scipy.linalg.LinAlgError, ValueError) as error:
        error_message = f'The eigensolve of 𝒥𝓛(k) at k = {wavenumber} failed: {error}'
        raise ConvergenceError(error_message) from error
    leading_index = int(np.argmax(eigenvalues.real))
    growth_rate = complex(eigenvalues[leading_index])
    coordinates = eigenvectors[:, leading_index]
    residual = np.linalg.norm(generator @ coordinates - growth_rate * coordinates) / np.linalg.norm(coordinates)
    profile = orient_profile(operators.basis.synthesize(coordinates), operators.wave.grid.spacing)
    return Eigenpair(wavenumber=float(wavenumber), growth_rate=growth_rate, profile=profile, residual=float(residual))


def unstable_eigen(
        wave: SolitaryWave | LinearizedOperators,
        wavenumber: float,
        *,
        growth_tolerance: float = DEFAULT_GROWTH_TOLERANCE,
) -> Eigenpair | None:
    """
    Finds the unstable eigenpair of σU = 𝒥𝓛(k)U, if there is one.

    :param wave: The solitary wave, or its already assembled linearized operators.
    :param wavenumber: The transverse wavenumber k ≥ 0.
    :param growth_tolerance: The real part σ must exceed to count as unstable.
    :return: The eigenpair with the largest real part, or None if that real part is at most the tolerance.
    :raises ConvergenceError: If the dense eigensolve fails.
    """
    if wavenumber < 0:
        error_message = f'The wavenumber must be nonnegative, but {wavenumber} was given.'
        raise ValueError(error_message)
    operators = wave if isinstance(wave, LinearizedOperators) else LinearizedOperators.new(wave)
    eigenpair = leading_eigenpair(operators, wavenumber)
    if eigenpair.growth_rate.real <= growth_tolerance:
        return None
    return eigenpair


@public
@dataclass
class EigenBranch:
    """
    The leading eigenvalue of 𝒥𝓛(k) sampled over k.

    :ivar wave: The solitary wave the branch belongs to.
    :ivar wavenumbers: The sampled wavenumbers, ascending. Failed samples are excluded.
    :ivar growth_rates: The unstable eigenvalue σ(k) per sample, or 0 where no unstable eigenvalue exists.
    :ivar leading_real_parts: The largest real part of the spectrum per sample, unstable or not.
    :ivar eigenfunctions: The phase aligned unstable eigenfunctions per sample, None where stable.
    :ivar band: The refined unstable band (k_lo, k_hi), or None if no sample is unstable.
    :ivar cutoff: The wavenumber K above which 𝓛(k) is positive, None if not located.
    :ivar edge_growth_rates: The largest real part of the spectrum at the two refined band edges.
    :ivar failed_wavenumbers: The samples at which the eigensolve failed.
    """

    wave: SolitaryWave
    wavenumbers: npt.NDArray[np.float64]
    growth_rates: npt.NDArray[np.complex128]
    leading_real_parts: npt.NDArray[np.float64]
    eigenfunctions: list[npt.NDArray[np.complex128] | None]
    band: tuple[float, float] | None
    cutoff: float | None
    edge_growth_rates: tuple[float, float] | None = None
    failed_wavenumbers: list[float] = field(default_factory=list)

    @property
    def unstable_mask(self) -> npt.NDArray[np.bool_]:
        return self.growth_rates.real > 0

    @property
    def maximum_growth_rate(self) -> float:
        return float(np.max(self.growth_rates.real, initial=0.0))

    @property
    def most_unstable_wavenumber(self) -> float | None:
        if not np.any(self.unstable_mask):
            return None
        return float(self.wavenumbers[int(np.argmax(self.growth_rates.real))])

    @property
    def most_unstable_eigenfunction(self) -> npt.NDArray[np.complex128] | None:
        """The eigenfunction U at the most unstable sample, None if no sample is unstable."""
        if not np.any(self.unstable_mask):
            return None
        return self.eigenfunctions[int(np.argmax(self.growth_rates.real))]

    @property
    def is_stable_above_cutoff(self) -> bool:
        """Whether every sample at or above the cutoff is stable."""
        if self.cutoff is None:
            return False
        above_cutoff = self.wavenumbers >= self.cutoff
        return not bool(np.any(self.unstable_mask[above_cutoff]))

    def to_data_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'k': self.wavenumbers,
            're_sigma': self.growth_rates.real,
            'im_sigma': self.growth_rates.imag,
        })


def align_eigenfunctions(eigenfunctions: list[npt.NDArray[np.complex128] | None], spacing: float):
    """
    Rotates each eigenfunction in place so its L² product with the previous unstable sample is real and positive.
    """
    previous = None
    for index, eigenfunction in enumerate(eigenfunctions):
        if eigenfunction is None:
            continue
        if previous is not None:
            overlap = np.sum(np.conj(previous) * eigenfunction) * spacing
            if abs(overlap) > 1e-12:
                eigenfunctions[index] = eigenfunction * (abs(overlap) / overlap)
        previous = eigenfunctions[index]


def refine_band_edge(operators: LinearizedOperators, stable_wavenumber: float, unstable_wavenumber: float) -> float:
    """
    Locates a band edge between a stable and an unstable sample as the root of the smallest eigenvalue of 𝓛(k).
    When 𝓛(k) is not positive at the stable sample, the stable sample itself is the edge (as at k = 0, where the
    instability degenerates into the translation Jordan block).
    """
    stable_value = operators.smallest_linearized_eigenvalue(stable_wavenumber)
    unstable_value = operators.smallest_linearized_eigenvalue(unstable_wavenumber)
    if stable_value <= 0:
        return stable_wavenumber
    if unstable_value >= 0:
        logger.warning(f'𝓛(k) is positive at the unstable sample k = {unstable_wavenumber}. Using the midpoint as '
                       f'the band edge.')
        return (stable_wavenumber + unstable_wavenumber) / 2
    return float(scipy.optimize.brentq(operators.smallest_linearized_eigenvalue, stable_wavenumber,
                                       unstable_wavenumber, xtol=EDGE_TOLERANCE))


def scan_branch(
        wave: SolitaryWave,
        minimum_wavenumber: float,
        maximum_wavenumber: float,
        sample_count: int,
        *,
        growth_tolerance: float = DEFAULT_GROWTH_TOLERANCE,
        workers: int = 1,
) -> EigenBranch:
    """
    Scans the leading eigenvalue of 𝒥𝓛(k) over evenly spaced k, then refines the edges of the unstable band.

    :param wave: The solitary wave.
    :param minimum_wavenumber: The smallest sampled k, nonnegative.
    :param maximum_wavenumber: The largest sampled k.
    :param sample_count: The number of samples.
    :param growth_tolerance: The real part σ must exceed to count as unstable.
    :param workers: The number of threads solving samples concurrently.
    :return: The branch. Samples whose eigensolve failed are listed in `failed_wavenumbers`.
    """
    if not 0 <= minimum_wavenumber < maximum_wavenumber:
        error_message = (f'The scan needs 0 ≤ k_min < k_max, but [{minimum_wavenumber}, {maximum_wavenumber}] '
                         f'was given.')
        raise ValueError(error_message)
    operators = LinearizedOperators.new(wave).warm()
    sampled_wavenumbers = np.linspace(minimum_wavenumber, maximum_wavenumber, sample_count)

    def solve_sample(wavenumber: float) -> Eigenpair | ConvergenceError:
        try:
            return leading_eigenpair(operators, wavenumber)
        except ConvergenceError as error:
            return error

    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(solve_sample, sampled_wavenumbers))
    eigenpairs: list[Eigenpair] = []
    failed_wavenumbers: list[float] = []
    for wavenumber, result in zip(sampled_wavenumbers, results):
        if isinstance(result, ConvergenceError):
            logger.warning(f'Dropping k = {wavenumber:.6g} from the branch: {result}')
            failed_wavenumbers.append(float(wavenumber))
        else:
            eigenpairs.append(result)
    wavenumbers = np.array([eigenpair.wavenumber for eigenpair in eigenpairs])
    leading_real_parts = np.array([eigenpair.growth_rate.real for eigenpair in eigenpairs])
    unstable = leading_real_parts > growth_tolerance
    growth_rates = np.array([eigenpair.growth_rate if is_unstable else 0j
                             for eigenpair, is_unstable in zip(eigenpairs, unstable)], dtype=np.complex128)
    eigenfunctions = [eigenpair.profile if is_unstable else None
                      for eigenpair, is_unstable in zip(eigenpairs, unstable)]
    align_eigenfunctions(eigenfunctions, wave.grid.spacing)
    branch = EigenBranch(wave=wave, wavenumbers=wavenumbers, growth_rates=growth_rates,
                         leading_real_parts=leading_real_parts, eigenfunctions=eigenfunctions, band=None,
                         cutoff=None, failed_wavenumbers=failed_wavenumbers)
    if not np.any(unstable):
        logger.info('No unstable sample found in the scan.')
        return branch
    unstable_indexes = np.flatnonzero(unstable)
    first_index, last_index = int(unstable_indexes[0]), int(unstable_indexes[-1])
    if first_index == 0:
        lower_edge = float(wavenumbers[0])
    else:
        lower_edge = refine_band_edge(operators, wavenumbers[first_index - 1], wavenumbers[first_index])
    if last_index == len(wavenumbers) - 1:
        logger.warning(f'The unstable band extends beyond the scanned k_max = {maximum_wavenumber}.')
        upper_edge = float(wavenumbers[-1])
        cutoff = None
    else:
        upper_edge = refine_band_edge(operators, wavenumbers[last_index + 1], wavenumbers[last_index])
        cutoff = upper_edge
    branch.band = (lower_edge, upper_edge)
    branch.cutoff = cutoff
    branch.edge_growth_rates = (leading_eigenpair(operators, lower_edge).growth_rate.real,
                                leading_eigenpair(operators, upper_edge).growth_rate.real)
    logger.info(f'Unstable band ({lower_edge:.6f}, {upper_edge:.6f}) with maximum growth rate '
                f'{branch.maximum_growth_rate:.6f} at k = {branch.most_unstable_wavenumber:.4f}.')
    return branch


def locate_cutoff(operators: LinearizedOperators, maximum_wavenumber: float) -> float | None:
    """
    Finds the wavenumber K at which the smallest eigenvalue of 𝓛(k) crosses zero, searching (0, k_max].

    :param operators: The linearized operators.
    :param maximum_wavenumber: The end of the search interval.
    :return: K, or None if 𝓛(k) is positive on the whole interval or still indefinite at its end.
    """
    if operators.smallest_linearized_eigenvalue(maximum_wavenumber) <= 0:
        return None
    lower_wavenumber = maximum_wavenumber * 1e-6
    if operators.smallest_linearized_eigenvalue(lower_wavenumber) >= 0:
        return None
    return float(scipy.optimize.brentq(operators.smallest_linearized_eigenvalue, lower_wavenumber,
                                       maximum_wavenumber, xtol=EDGE_TOLERANCE))


def export_eigenfunction_csv(wave: SolitaryWave, profile: npt.NDArray[np.complex128], path):
    """Writes an eigenfunction as CSV columns `x, re_U, im_U`."""
    data_frame = pd.DataFrame({'x': wave.grid.nodes, 're_U': profile.real, 'im_U': profile.imag})
    data_frame.to_csv(path, index=False)
    return path
