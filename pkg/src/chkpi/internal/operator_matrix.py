"""
Dense matrices of the operators linearized about a solitary wave: H_c, 𝓛(k) = H_c − k²∂x⁻², 𝒥, 𝓛̃(k) = 𝒥𝓛(k)𝒥*
and n(k) = −∂x H_c ∂x + k².
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property

import numpy as np
import numpy.typing as npt
import scipy.linalg
from public import public
from typing_extensions import Self

from chkpi.internal.errors import NonzeroMeanError, ZeroFrequencyError
from chkpi.internal.fourier_basis import FourierBasis
from chkpi.internal.grid import Grid1D
from chkpi.internal.solitary_wave import SolitaryWave

logger = logging.getLogger(__name__)


@public
class OperatorTag(StrEnum):
    HC = 'Hc'
    LK = 'Lk'
    JOP = 'Jop'
    LTILDE_K = 'LtildeK'
    NK = 'nK'


@public
class LtildeConstruction(StrEnum):
    TRIPLE_PRODUCT = 'triple_product'
    SYMBOL = 'symbol'


@public
@dataclass(frozen=True)
class OperatorMatrix:
    """
    A dense operator matrix in a real trigonometric basis.

    :ivar tag: Which operator the matrix discretizes.
    :ivar matrix: The matrix.
    :ivar wavenumber: The transverse wavenumber k the operator was assembled at.
    :ivar basis: The basis the matrix acts on.
    """

    tag: OperatorTag
    matrix: npt.NDArray[np.float64]
    wavenumber: float
    basis: FourierBasis

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_error(self) -> float:
        """The relative size ‖M − M*‖/‖M‖ of the non Hermitian part."""
        return float(np.linalg.norm(self.matrix - self.matrix.conj().T) / np.linalg.norm(self.matrix))

    def skewness_error(self) -> float:
        """The relative size ‖M + M*‖/‖M‖ of the Hermitian part."""
        return float(np.linalg.norm(self.matrix + self.matrix.conj().T) / np.linalg.norm(self.matrix))

    def apply(self, values: npt.NDArray) -> npt.NDArray:
        """
        Applies the operator to node values. The values are first projected onto the basis.

        :param values: The node values.
        :return: The node values of the result.
        """
        return self.basis.synthesize(self.matrix @ self.basis.analyze(values))

    def eigenvalues(self) -> npt.NDArray[np.float64]:
        """The ascending eigenvalues of a Hermitian operator matrix."""
        return scipy.linalg.eigvalsh(self.matrix)


def wave_potential(wave: SolitaryWave) -> npt.NDArray[np.float64]:
    """The zeroth order coefficient φ″ − 3φ − 2κ + c of H_c."""
    return wave.profile_second_derivative - 3 * wave.profile - 2 * wave.kappa + wave.speed


def hessian_matrix(wave: SolitaryWave, basis: FourierBasis) -> npt.NDArray[np.float64]:
    """The matrix Dᵀ G(c − φ) D + G(V) of H_c = −∂x((c − φ)∂x) + V in a basis."""
    derivative = basis.derivative_matrix
    stiffness = derivative.T @ basis.multiplication_matrix(wave.speed - wave.profile) @ derivative
    hessian = stiffness + basis.multiplication_matrix(wave_potential(wave))
    return (hessian + hessian.T) / 2


@public
@dataclass(frozen=True)
class LinearizedOperators:
    """
    The linearized operators about one solitary wave on the mean-free basis, with the k-independent parts cached so
    that scans over k only add diagonal terms.

    :ivar wave: The solitary wave.
    :ivar basis: The mean-free basis.
    """

    wave: SolitaryWave
    basis: FourierBasis

    @classmethod
    def new(cls, wave: SolitaryWave) -> Self:
        return cls(wave=wave, basis=FourierBasis.new(grid=wave.grid))

    @cached_property
    def hessian(self) -> npt.NDArray[np.float64]:
        return hessian_matrix(self.wave, self.basis)

    @cached_property
    def helmholtz_diagonal(self) -> npt.NDArray[np.float64]:
        """The diagonal 1 + ξ² of 1 − ∂x² in the basis."""
        return 1 + self.basis.wavenumbers ** 2

    @cached_property
    def skew(self) -> npt.NDArray[np.float64]:
        """The matrix Λ⁻¹D of 𝒥 = (1 − ∂x²)⁻¹∂x."""
        return self.basis.derivative_matrix / self.helmholtz_diagonal[:, np.newaxis]

    @cached_property
    def inverse_derivative_squared_diagonal(self) -> npt.NDArray[np.float64]:
        """The diagonal 1/ξ² of −∂x⁻²."""
        return 1 / self.basis.wavenumbers ** 2

    @cached_property
    def derivative_conjugated_hessian(self) -> npt.NDArray[np.float64]:
        """The matrix Dᵀ H_c D of −∂x H_c ∂x."""
        derivative = self.basis.derivative_matrix
        matrix = derivative.T @ self.hessian @ derivative
        return (matrix + matrix.T) / 2

    def warm(self) -> Self:
        """Evaluates the cached parts, so concurrent readers find them ready."""
        _ = self.hessian, self.skew, self.inverse_derivative_squared_diagonal
        return self

    def linearized(self, wavenumber: float) -> npt.NDArray[np.float64]:
        """The matrix of 𝓛(k). At k = 0 the transverse term is dropped exactly."""
        if wavenumber == 0:
            return self.hessian
        return self.hessian + np.diag(wavenumber ** 2 * self.inverse_derivative_squared_diagonal)

    def generator(self, wavenumber: float) -> npt.NDArray[np.float64]:
        """The matrix of 𝒥𝓛(k), whose eigenvalues are the growth rates σ."""
        return self.skew @ self.linearized(wavenumber)

    def symmetrized(self, wavenumber: float) -> npt.NDArray[np.float64]:
        """The matrix of 𝓛̃(k) by the triple product 𝒥𝓛(k)𝒥*."""
        matrix = self.skew @ self.linearized(wavenumber) @ self.skew.T
        return (matrix + matrix.T) / 2

    def symmetrized_from_symbol(self, wavenumber: float) -> npt.NDArray[np.float64]:
        """The matrix of 𝓛̃(k) as (1 − ∂x²)⁻¹ n(k) (1 − ∂x²)⁻¹."""
        inverse_helmholtz = 1 / self.helmholtz_diagonal
        matrix = self.derivative_squared_symbol(wavenumber)
        return inverse_helmholtz[:, np.newaxis] * matrix * inverse_helmholtz[np.newaxis, :]

    def derivative_squared_symbol(self, wavenumber: float) -> npt.NDArray[np.float64]:
        """The matrix of n(k) = −∂x H_c ∂x + k²."""
        return self.derivative_conjugated_hessian + wavenumber ** 2 * np.eye(self.basis.dimension)

    def smallest_linearized_eigenvalue(self, wavenumber: float) -> float:
        """The smallest eigenvalue of 𝓛(k), which is negative exactly on the unstable band."""
        eigenvalues = scipy.linalg.eigh(self.linearized(wavenumber), eigvals_only=True, subset_by_index=[0, 0])
        return float(eigenvalues[0])

    def smallest_symmetrized_eigenvalue(self, wavenumber: float) -> float:
        eigenvalues = scipy.linalg.eigh(self.symmetrized(wavenumber), eigvals_only=True, subset_by_index=[0, 0])
        return float(eigenvalues[0])


def assemble_Hc(wave: SolitaryWave, *, include_mean: bool = True) -> OperatorMatrix:  # noqa N802
    """
    Assembles H_c = −∂x((c − φ)∂x) + φ″ − 3φ − 2κ + c.

    :param wave: The solitary wave.
    :param include_mean: Whether the basis includes the constant vector.
    :return: The operator matrix.
    """
    basis = FourierBasis.new(grid=wave.grid, includes_mean=include_mean)
    return OperatorMatrix(tag=OperatorTag.HC, matrix=hessian_matrix(wave, basis), wavenumber=0.0, basis=basis)


def assemble_Lk(wave: SolitaryWave, wavenumber: float, *, include_mean: bool = False) -> OperatorMatrix:  # noqa N802
    """
    Assembles 𝓛(k) = H_c − k²∂x⁻² on the mean-free subspace.

    :param wave: The solitary wave.
    :param wavenumber: The transverse wavenumber k, nonzero.
    :param include_mean: Must be false. The constant vector is outside the domain of ∂x⁻².
    :return: The operator matrix.
    :raises ZeroFrequencyError: If k = 0.
    :raises NonzeroMeanError: If the basis was requested to include the constant vector.
    """
    if wavenumber == 0:
        error_message = 'The operator 𝓛(k) needs ∂x⁻² and is only assembled for k ≠ 0. Use H_c at k = 0.'
        raise ZeroFrequencyError(error_message)
    if include_mean:
        error_message = 'The operator 𝓛(k) is only defined on zero x-mean data, so the basis cannot include the mean.'
        raise NonzeroMeanError(error_message)
    operators = LinearizedOperators.new(wave)
    return OperatorMatrix(tag=OperatorTag.LK, matrix=operators.linearized(wavenumber), wavenumber=float(wavenumber),
                          basis=operators.basis)


def assemble_J(grid: Grid1D) -> OperatorMatrix:  # noqa N802
    """
    Assembles 𝒥 = (1 − ∂x²)⁻¹∂x on the mean-free subspace.

    :param grid: The grid.
    :return: The skew operator matrix.
    """
    basis = FourierBasis.new(grid=grid)
    matrix = basis.derivative_matrix / (1 + basis.wavenumbers ** 2)[:, np.newaxis]
    return OperatorMatrix(tag=OperatorTag.JOP, matrix=matrix, wavenumber=0.0, basis=basis)


def assemble_Ltilde(  # noqa N802
        wave: SolitaryWave,
        wavenumber: float,
        *,
        construction: LtildeConstruction = LtildeConstruction.TRIPLE_PRODUCT,
) -> OperatorMatrix:
    """
    Assembles 𝓛̃(k) = 𝒥𝓛(k)𝒥* on the mean-free subspace. k = 0 is allowed.

    :param wave: The solitary wave.
    :param wavenumber: The transverse wavenumber k.
    :param construction: Whether to form the triple product or the symbol level composition
        (1 − ∂x²)⁻¹ n(k) (1 − ∂x²)⁻¹.
    :return: The operator matrix.
    """
    operators = LinearizedOperators.new(wave)
    if construction == LtildeConstruction.TRIPLE_PRODUCT:
        matrix = operators.symmetrized(wavenumber)
    else:
        matrix = operators.symmetrized_from_symbol(wavenumber)
    return OperatorMatrix(tag=OperatorTag.LTILDE_K, matrix=matrix, wavenumber=float(wavenumber),
                          basis=operators.basis)


def assemble_nk(wave: SolitaryWave, wavenumber: float) -> OperatorMatrix:
    """
    Assembles n(k) = −∂x H_c ∂x + k² on the mean-free subspace.

    :param wave: The solitary wave.
    :param wavenumber: The transverse wavenumber k.
    :return: The operator matrix.
    """
    operators = LinearizedOperators.new(wave)
    return OperatorMatrix(tag=OperatorTag.NK, matrix=operators.derivative_squared_symbol(wavenumber),
                          wavenumber=float(wavenumber), basis=operators.basis)


def instability_wavenumber_bound(wave: SolitaryWave) -> float:
    """
    An upper bound on the unstable band. Since c − φ ≥ 2κ, 𝓛(k) ≥ 2κξ² + k²/ξ² + min V ≥ 2√(2κ)k + min V, which is
    positive once k exceeds max(−V)/(2√(2κ)).

    :param wave: The solitary wave.
    :return: The bound.
    """
    most_negative_potential = max(-float(np.min(wave_potential(wave))), 0.0)
    return most_negative_potential / (2 * np.sqrt(2 * wave.kappa))
