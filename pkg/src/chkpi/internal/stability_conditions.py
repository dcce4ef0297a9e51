"""
Numerical checks of the four spectral conditions on 𝓛̃(k) that imply the transverse instability, and of the
absence of imaginary roots of the limiting characteristic quartic.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.linalg
from public import public
from typing_extensions import Self

from chkpi.internal.eigen_analysis import SPECTRAL_ZERO_TOLERANCE, locate_cutoff
from chkpi.internal.operator_matrix import LinearizedOperators
from chkpi.internal.solitary_wave import SolitaryWave

logger = logging.getLogger(__name__)

MONOTONICITY_TOLERANCE = 1e-10
# Samples this close to the cutoff (relatively) give ill-conditioned growth ratios.
CUTOFF_SEPARATION = 1e-6


@public
@dataclass
class ConditionEntry:
    """
    One condition check. The verdict is derived from the stored margins only.

    :ivar name: The condition name.
    :ivar margin: The primary margin. The condition holds when the margin exceeds the threshold.
    :ivar threshold: The threshold of the primary margin.
    :ivar k_samples: The wavenumbers the condition was tested at.
    :ivar auxiliary_margin: A secondary margin that must be positive, when the condition has one.
    :ivar details: Further numbers describing the check.
    """

    name: str
    margin: float
    threshold: float
    k_samples: list[float]
    auxiliary_margin: float | None = None
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.margin) or self.margin <= self.threshold:
            return False
        return self.auxiliary_margin is None or self.auxiliary_margin > 0

    def to_dict(self) -> dict[str, Any]:
        dictionary = asdict(self)
        dictionary['passed'] = self.passed
        return dictionary

    @classmethod
    def from_dict(cls, dictionary: dict[str, Any]) -> Self:
        dictionary = {key: value for key, value in dictionary.items() if key != 'passed'}
        return cls(**dictionary)


@public
@dataclass
class ConditionReport:
    """
    The verdicts on the four spectral conditions.

    :ivar cutoff: The wavenumber K above which 𝓛̃(k) is positive, None if not located.
    :ivar cond1: Uniform positivity of 𝓛̃(k) for k above the cutoff.
    :ivar cond2: Positivity of the limiting symbol cξ⁴ + (c − 2κ)ξ² + k².
    :ivar cond3: Monotonicity of 𝓛̃(k) in k.
    :ivar cond4: A single isolated negative eigenvalue of 𝓛̃(0).
    """

    cutoff: float | None
    cond1: ConditionEntry
    cond2: ConditionEntry
    cond3: ConditionEntry
    cond4: ConditionEntry

    @property
    def entries(self) -> list[ConditionEntry]:
        return [self.cond1, self.cond2, self.cond3, self.cond4]

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    def to_dict(self) -> dict[str, Any]:
        return {
            'cutoff': self.cutoff,
            'passed': self.passed,
            'cond1': self.cond1.to_dict(),
            'cond2': self.cond2.to_dict(),
            'cond3': self.cond3.to_dict(),
            'cond4': self.cond4.to_dict(),
        }

    @classmethod
    def from_dict(cls, dictionary: dict[str, Any]) -> Self:
        return cls(
            cutoff=dictionary['cutoff'],
            cond1=ConditionEntry.from_dict(dictionary['cond1']),
            cond2=ConditionEntry.from_dict(dictionary['cond2']),
            cond3=ConditionEntry.from_dict(dictionary['cond3']),
            cond4=ConditionEntry.from_dict(dictionary['cond4']),
        )


def limiting_symbol(speed: float, kappa: float, xi: npt.NDArray, wavenumber: float) -> npt.NDArray:
    """The symbol cξ⁴ + (c − 2κ)ξ² + k² of the limiting operator n_∞(k)."""
    return speed * xi ** 4 + (speed - 2 * kappa) * xi ** 2 + wavenumber ** 2


def check_uniform_positivity(operators: LinearizedOperators, wavenumbers: npt.NDArray,
                             cutoff: float | None) -> ConditionEntry:
    if cutoff is None:
        logger.warning('The cutoff K was not located, so uniform positivity cannot be checked.')
        return ConditionEntry(name='cond1', margin=float('nan'), threshold=0.0, k_samples=[])
    samples = np.sort(wavenumbers[wavenumbers > cutoff * (1 + CUTOFF_SEPARATION)])
    if samples.size == 0:
        logger.warning(f'No k sample lies above the cutoff K = {cutoff:.6f}.')
        return ConditionEntry(name='cond1', margin=float('nan'), threshold=0.0, k_samples=[])
    smallest_eigenvalues = np.array([operators.smallest_symmetrized_eigenvalue(k) for k in samples])
    cutoff_eigenvalue = operators.smallest_symmetrized_eigenvalue(cutoff)
    growth_ratios = (smallest_eigenvalues - cutoff_eigenvalue) / (samples ** 2 - cutoff ** 2)
    increments = np.diff(smallest_eigenvalues)
    if increments.size > 0:
        smallest_increment = float(np.min(increments))
    else:
        smallest_increment = float(np.min(growth_ratios))
    largest_ratio_slack = float(np.min(1 - growth_ratios))
    return ConditionEntry(
        name='cond1',
        margin=float(np.min(smallest_eigenvalues)),
        threshold=0.0,
        k_samples=samples.tolist(),
        auxiliary_margin=min(smallest_increment, float(np.min(growth_ratios)), largest_ratio_slack + 1e-12),
        details={
            'smallest_eigenvalues': smallest_eigenvalues.tolist(),
            'growth_ratios': growth_ratios.tolist(),
            'cutoff_eigenvalue': cutoff_eigenvalue,
        },
    )


def check_symbol_positivity(wave: SolitaryWave, xi: npt.NDArray, wavenumbers: npt.NDArray) -> ConditionEntry:
    samples = wavenumbers[wavenumbers != 0]
    discrete_minima = []
    analytic_margins = []
    bottom_ratios = []
    for wavenumber in samples:
        values = limiting_symbol(wave.speed, wave.kappa, xi, wavenumber)
        discrete_minima.append(float(np.min(values)))
        analytic_margins.append(float(wavenumber ** 2))
        bottom_ratios.append(float(np.min(values / (1 + xi ** 2) ** 2)))
    return ConditionEntry(
        name='cond2',
        margin=min(discrete_minima, default=float('nan')),
        threshold=0.0,
        k_samples=samples.tolist(),
        auxiliary_margin=min(analytic_margins, default=float('nan')),
        details={
            'discrete_minima': discrete_minima,
            'analytic_margins': analytic_margins,
            'symmetrized_symbol_bottoms': bottom_ratios,
        },
    )


def check_monotonicity(operators: LinearizedOperators, wavenumbers: npt.NDArray) -> ConditionEntry:
    samples = np.sort(wavenumbers)
    pair_minima = []
    for lower_wavenumber, upper_wavenumber in zip(samples[:-1], samples[1:]):
        difference = operators.symmetrized(upper_wavenumber) - operators.symmetrized(lower_wavenumber)
        smallest = scipy.linalg.eigh(difference, eigvals_only=True, subset_by_index=[0, 0])[0]
        pair_minima.append(float(smallest))
    return ConditionEntry(
        name='cond3',
        margin=min(pair_minima, default=float('nan')),
        threshold=-MONOTONICITY_TOLERANCE,
        k_samples=samples.tolist(),
        details={'pair_minima': pair_minima},
    )


def check_single_negative_eigenvalue(operators: LinearizedOperators) -> ConditionEntry:
    eigenvalues = scipy.linalg.eigvalsh(operators.symmetrized(0.0))
    negative_count = int(np.count_nonzero(eigenvalues < -SPECTRAL_ZERO_TOLERANCE))
    margin = min(-eigenvalues[0] - SPECTRAL_ZERO_TOLERANCE, eigenvalues[1] + SPECTRAL_ZERO_TOLERANCE)
    return ConditionEntry(
        name='cond4',
        margin=float(margin),
        threshold=0.0,
        k_samples=[0.0],
        details={
            'negative_count': negative_count,
            'negative_eigenvalue': float(eigenvalues[0]),
            'next_eigenvalue': float(eigenvalues[1]),
            'isolation_gap': float(eigenvalues[1] - eigenvalues[0]),
        },
    )


def verify_rt_conditions(
        wave: SolitaryWave,
        k_samples: npt.ArrayLike,
        *,
        cutoff: float | None = None,
) -> ConditionReport:
    """
    Checks the four spectral conditions on 𝓛̃(k). Failures are reported as verdicts, never raised.

    :param wave: The solitary wave.
    :param k_samples: The sampled wavenumbers, which should cover [0, 2K].
    :param cutoff: The wavenumber K above which 𝓛(k) is positive. Located from the samples when not given.
    :return: The report.
    """
    wavenumbers = np.asarray(k_samples, dtype=np.float64)
    operators = LinearizedOperators.new(wave)
    if cutoff is None:
        cutoff = locate_cutoff(operators, float(np.max(wavenumbers)))
    report = ConditionReport(
        cutoff=cutoff,
        cond1=check_uniform_positivity(operators, wavenumbers, cutoff),
        cond2=check_symbol_positivity(wave, operators.basis.positive_wavenumbers, wavenumbers),
        cond3=check_monotonicity(operators, wavenumbers),
        cond4=check_single_negative_eigenvalue(operators),
    )
    for entry in report.entries:
        logger.info(f'Condition {entry.name}: {"pass" if entry.passed else "FAIL"} (margin {entry.margin:.3e}).')
    return report


@public
@dataclass
class AInfinityVerdict:
    """
    The roots of cλ⁴ − σλ³ − (c − 2κ)λ² + σλ + k² for sampled σ.

    :ivar wavenumber: The transverse wavenumber k.
    :ivar growth_rates: The sampled σ.
    :ivar roots: The four roots per sampled σ.
    :ivar minimum_real_part_distances: The smallest |Re λ| over the roots, per sampled σ.
    :ivar analytic_margin: The lower bound k² on the real part of the quartic at λ = iμ.
    """

    wavenumber: float
    growth_rates: list[complex]
    roots: list[npt.NDArray[np.complex128]]
    minimum_real_part_distances: list[float]
    analytic_margin: float

    @property
    def root_counts(self) -> list[int]:
        return [len(roots) for roots in self.roots]

    @property
    def passed(self) -> bool:
        return self.analytic_margin > 0 and all(distance > 0 for distance in self.minimum_real_part_distances)


def a_infinity_check(speed: float, kappa: float, wavenumber: float, growth_rates: npt.ArrayLike) -> AInfinityVerdict:
    """
    Checks that the characteristic quartic of the limiting matrix has no imaginary root for each sampled σ with
    Re σ > 0. At λ = iμ the real part of the quartic is cμ⁴ + (c − 2κ)μ² + k² ≥ k².

    :param speed: The wave speed c.
    :param kappa: The parameter κ.
    :param wavenumber: The transverse wavenumber k, nonzero.
    :param growth_rates: The sampled σ. Samples with Re σ ≤ 0 are skipped.
    :return: The verdict.
    """
    if wavenumber == 0:
        error_message = 'The limiting quartic check needs k ≠ 0.'
        raise ValueError(error_message)
    amplitude = speed - 2 * kappa
    sampled_growth_rates = [complex(growth_rate) for growth_rate in np.atleast_1d(growth_rates)
                            if complex(growth_rate).real > 0]
    roots = []
    distances = []
    for growth_rate in sampled_growth_rates:
        coefficients = [speed, -growth_rate, -amplitude, growth_rate, wavenumber ** 2]
        quartic_roots = np.roots(coefficients)
        roots.append(quartic_roots)
        distances.append(float(np.min(np.abs(quartic_roots.real))))
    return AInfinityVerdict(
        wavenumber=float(wavenumber),
        growth_rates=sampled_growth_rates,
        roots=roots,
        minimum_real_part_distances=distances,
        analytic_margin=float(wavenumber ** 2),
    )
