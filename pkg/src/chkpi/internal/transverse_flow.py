"""
The flow of the equation written about a line solitary wave, acting on fields stored as rows of x-coefficients with one
transverse wavenumber per row.

The quadratic part ½u_x² + uu_xx − (3/2)u² is rewritten as ½∂x²(u²) − ½u_x² − (3/2)u², so that 𝒥 acts on it through
the first order symbol of 𝒥∂x² and no third derivative of a product is formed. Its symmetric bilinear form

    B(u, w) = 𝒥[(½∂x² − 3/2)(uw) − ½u_x w_x]

with 2/3 truncated x-products is shared by every nonlinear term, so B(φ + v, φ + v) = B(φ, φ) + 2B(φ, v) + B(v, v)
holds to round off in the discrete setting too.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import numpy.typing as npt
from public import public
from typing_extensions import Self

from chkpi.internal.grid import Grid1D
from chkpi.internal.multiplier import (
    X_DERIVATIVE,
    constant_coefficient_multiplier,
    skew_multiplier,
    skew_second_derivative_multiplier,
)
from chkpi.internal.solitary_wave import SolitaryWave
from chkpi.internal.spectral_field import x_forward_transform, x_inverse_transform


def explicit_stiffness_bound(maximum_wavenumber: float, amplitude: float, slope: float, curvature: float) -> float:
    """
    A bound on the spectral radius of the explicit part 𝒥(u∂x² + u_x∂x + u_xx − 3u) linearized about a field u.
    The symbol of 𝒥 is bounded by 1/2 and the one of 𝒥∂x² by ξ.

    :param maximum_wavenumber: The largest wavenumber the explicit part produces.
    :param amplitude: max |u|.
    :param slope: max |u_x|.
    :param curvature: max |u_xx|.
    :return: The bound.
    """
    return amplitude * maximum_wavenumber + slope + 0.5 * curvature + 1.5 * amplitude


@public
@dataclass(frozen=True)
class TransverseFlow:
    """
    The flow about a solitary wave, 𝒥𝓛 = A∞ + 2B(φ, ·), where A∞ is the constant coefficient part with symbol
    i(cξ⁴ + (c − 2κ)ξ² + η²)/(ξ(1 + ξ² + ε(ξ² + η²)²)).

    :ivar wave: The solitary wave.
    :ivar transverse_wavenumbers: The transverse wavenumber η of each row.
    :ivar epsilon: The regularization strength of 𝒥^ε.
    """

    wave: SolitaryWave
    transverse_wavenumbers: npt.NDArray[np.float64]
    epsilon: float = 0.0

    @classmethod
    def new(cls, *, wave: SolitaryWave, transverse_wavenumbers: npt.ArrayLike, epsilon: float = 0.0) -> Self:
        if epsilon < 0:
            error_message = f'The regularization strength must be nonnegative, but {epsilon} was given.'
            raise ValueError(error_message)
        transverse_wavenumbers = np.atleast_1d(np.asarray(transverse_wavenumbers, dtype=np.float64))
        return cls(wave=wave, transverse_wavenumbers=transverse_wavenumbers, epsilon=float(epsilon))

    @property
    def x_grid(self) -> Grid1D:
        return self.wave.grid

    @cached_property
    def _transverse_mesh(self) -> npt.NDArray[np.float64]:
        return self.transverse_wavenumbers[:, np.newaxis]

    @cached_property
    def derivative_symbol(self) -> npt.NDArray[np.complex128]:
        return X_DERIVATIVE.evaluate(self.x_grid.odd_wavenumbers[np.newaxis, :], self._transverse_mesh)

    @cached_property
    def skew_symbol(self) -> npt.NDArray[np.complex128]:
        return skew_multiplier(self.epsilon).evaluate(self.x_grid.odd_wavenumbers[np.newaxis, :],
                                                      self._transverse_mesh)

    @cached_property
    def skew_curvature_symbol(self) -> npt.NDArray[np.complex128]:
        """The symbol of 𝒥^ε∂x², bounded by |ξ|."""
        skew_derivative = skew_second_derivative_multiplier(self.epsilon).evaluate(
            self.x_grid.wavenumbers[np.newaxis, :], self._transverse_mesh)
        return skew_derivative * self.derivative_symbol

    @cached_property
    def linear_symbol(self) -> npt.NDArray[np.complex128]:
        multiplier = constant_coefficient_multiplier(self.wave.speed, self.wave.kappa, self.epsilon)
        return multiplier.evaluate(self.x_grid.odd_wavenumbers[np.newaxis, :], self._transverse_mesh)

    @cached_property
    def x_mask(self) -> npt.NDArray[np.bool_]:
        """The 2/3 truncation mask in x."""
        return np.abs(self.x_grid.mode_indices) <= self.x_grid.node_count / 3

    @property
    def dealiased_maximum_wavenumber(self) -> float:
        return np.pi * (self.x_grid.node_count // 3) / self.x_grid.half_length

    def combine_products(self, product: npt.NDArray[np.complex128],
                         gradient_product: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
        """
        Forms 𝒥[(½∂x² − 3/2)P − ½P′] from the truncated coefficients of the products P = uw and P′ = u_x w_x.
        """
        return ((0.5 * self.skew_curvature_symbol - 1.5 * self.skew_symbol) * product
                - 0.5 * self.skew_symbol * gradient_product)

    def remainder(self, coefficients: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
        """
        Applies 2B(φ, ·) = 𝒥(∂x(φ∂x) + φ″ − 3φ), the part of the linearized flow that depends on the wave.

        :param coefficients: The x-coefficients, with rows along the second to last axis.
        :return: The x-coefficients of the result, 2/3 truncated in x.
        """
        values = x_inverse_transform(coefficients)
        derivative_values = x_inverse_transform(self.derivative_symbol * coefficients)
        product = self.x_mask * x_forward_transform(self.wave.profile * values)
        gradient_product = self.x_mask * x_forward_transform(self.wave.profile_derivative * derivative_values)
        return 2 * self.combine_products(product, gradient_product)

    def linear_action(self, coefficients: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
        """Applies 𝒥𝓛 = A∞ + remainder."""
        return self.linear_symbol * coefficients + self.remainder(coefficients)

    def stiffness_bound(self) -> float:
        """The explicit stiffness bound of the remainder, from the size of the wave."""
        return explicit_stiffness_bound(self.dealiased_maximum_wavenumber,
                                        float(np.max(np.abs(self.wave.profile))),
                                        float(np.max(np.abs(self.wave.profile_derivative))),
                                        float(np.max(np.abs(self.wave.profile_second_derivative))))
