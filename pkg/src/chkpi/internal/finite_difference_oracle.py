"""
An independent fourth order finite difference discretization of 𝒥𝓛(k), used to cross check the growth rates of the
Fourier discretization.
"""
from __future__ import annotations

import numpy as np
import numpy.typing as npt
import pandas as pd
import scipy.linalg

from chkpi.internal.eigen_analysis import leading_eigenpair
from chkpi.internal.errors import ConvergenceError
from chkpi.internal.operator_matrix import LinearizedOperators
from chkpi.internal.solitary_wave import SolitaryWave

ORACLE_BAND_FRACTIONS = (0.25, 0.5, 0.75)


def first_derivative_matrix(node_count: int, spacing: float) -> npt.NDArray[np.float64]:
    """The periodic fourth order central difference matrix of ∂x."""
    column = np.zeros(node_count)
    column[1], column[2] = -8.0, 1.0
    column[-1], column[-2] = 8.0, -1.0
    return scipy.linalg.circulant(column / (12 * spacing))


def second_derivative_matrix(node_count: int, spacing: float) -> npt.NDArray[np.float64]:
    """The periodic fourth order central difference matrix of ∂x²."""
    column = np.zeros(node_count)
    column[0] = -30.0
    column[1] = column[-1] = 16.0
    column[2] = column[-2] = -1.0
    return scipy.linalg.circulant(column / (12 * spacing ** 2))


def finite_difference_generator(wave: SolitaryWave, wavenumber: float) -> npt.NDArray[np.float64]:
    """
    The finite difference matrix of 𝒥𝓛(k) restricted to the zero mean node vectors.

    :param wave: The solitary wave. Only its profile samples are used.
    :param wavenumber: The transverse wavenumber k.
    :return: The matrix, in an orthonormal basis of the zero mean subspace.
    """
    node_count = wave.grid.node_count
    spacing = wave.grid.spacing
    profile = wave.profile
    first_derivative = first_derivative_matrix(node_count, spacing)
    second_derivative = second_derivative_matrix(node_count, spacing)
    profile_second_derivative = second_derivative @ profile
    potential = profile_second_derivative - 3 * profile - 2 * wave.kappa + wave.speed
    hessian = -first_derivative @ ((wave.speed - profile)[:, np.newaxis] * first_derivative) + np.diag(potential)
    mean_free_basis = scipy.linalg.null_space(np.ones((1, node_count)))
    reduced_second_derivative = mean_free_basis.T @ second_derivative @ mean_free_basis
    linearized = mean_free_basis.T @ hessian @ mean_free_basis
    if wavenumber != 0:
        linearized = linearized - wavenumber ** 2 * np.linalg.inv(reduced_second_derivative)
    skew = np.linalg.solve(np.eye(node_count) - second_derivative, first_derivative)
    reduced_skew = mean_free_basis.T @ skew @ mean_free_basis
    return reduced_skew @ linearized


def finite_difference_growth_rate(wave: SolitaryWave, wavenumber: float) -> complex:
    """
    The eigenvalue with the largest real part of the finite difference 𝒥𝓛(k).

    :param wave: The solitary wave.
    :param wavenumber: The transverse wavenumber k.
    :return: The eigenvalue.
    :raises ConvergenceError: If the eigensolve fails.
    """
    try:
        eigenvalues = scipy.linalg.eigvals(finite_difference_generator(wave, wavenumber))
    except scipy.linalg.LinAlgError as error:
        error_message = f'The finite difference eigensolve at k = {wavenumber} failed: {error}'
        raise ConvergenceError(error_message) from error
    return complex(eigenvalues[int(np.argmax(eigenvalues.real))])


def band_oracle_comparison(
        wave: SolitaryWave,
        band: tuple[float, float],
        *,
        fractions: tuple[float, ...] = ORACLE_BAND_FRACTIONS,
) -> pd.DataFrame:
    """
    Compares the leading growth rate of the Fourier and the finite difference discretizations at interior points of
    the unstable band.

    :param wave: The solitary wave.
    :param band: The unstable band (k_lo, k_hi).
    :param fractions: The positions of the compared wavenumbers within the band, in (0, 1).
    :return: A table with columns `k, re_sigma, re_sigma_oracle, deviation`, the deviation being relative.
    """
    lower, upper = band
    operators = LinearizedOperators.new(wave)
    rows = []
    for fraction in fractions:
        wavenumber = lower + fraction * (upper - lower)
        growth_rate = leading_eigenpair(operators, wavenumber).growth_rate.real
        oracle_growth_rate = finite_difference_growth_rate(wave, wavenumber).real
        deviation = abs(oracle_growth_rate / growth_rate - 1) if growth_rate > 0 else np.inf
        rows.append((wavenumber, growth_rate, oracle_growth_rate, deviation))
    return pd.DataFrame(rows, columns=['k', 're_sigma', 're_sigma_oracle', 'deviation'])
