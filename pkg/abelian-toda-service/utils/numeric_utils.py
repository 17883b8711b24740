"""
Numeric utility functions for the abelian Toda service.

This module provides the small numerical kernels shared by the recursion
solver and the operator checks: fourth-order differentiation on uniform
time grids with a Richardson resolution test, Taylor coefficients from
samples on a circle, spline interpolation of complex data, and truncated
power-series arithmetic with two-point Hermite quadrature.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg, special
from scipy.interpolate import CubicSpline

from exceptions import DerivativeResolutionError

logger = logging.getLogger(__name__)

RESOLUTION_TOLERANCE = 1e-6

# Five-point first-derivative stencils (numerator weights over 12 h) by node offset.
_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0])
_FORWARD = np.array([-25.0, 48.0, -36.0, 16.0, -3.0])
_FORWARD_ONE = np.array([-3.0, -10.0, 18.0, -6.0, 1.0])


class NumericUtils:
    """
    Utility class for grid derivatives, contour coefficients, splines and power series.

    All methods are static and operate on complex numpy arrays.
    """

    @staticmethod
    def grid_derivative(values: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
        """
        Fourth-order first derivative on a uniform grid.

        Interior nodes use the central five-point stencil; the two nodes at
        each end use one-sided five-point stencils.

        Args:
            values: Samples, uniform along `axis`
            h: Grid spacing
            axis: Axis of the grid

        Returns:
            Array of derivatives with the shape of `values`

        Raises:
            ValueError: If the grid has fewer than five nodes
        """
        data = np.moveaxis(np.asarray(values, dtype=complex), axis, 0)
        n = data.shape[0]
        if n < 5:
            raise ValueError(f"Fourth-order differences need at least 5 grid nodes, got {n}")
        out = np.empty_like(data)
        for i in range(2, n - 2):
            out[i] = np.tensordot(_CENTRAL, data[i - 2 : i + 3], axes=1)
        out[0] = np.tensordot(_FORWARD, data[0:5], axes=1)
        out[1] = np.tensordot(_FORWARD_ONE, data[0:5], axes=1)
        out[n - 1] = -np.tensordot(_FORWARD, data[n - 1 : n - 6 : -1] if n > 5 else data[::-1], axes=1)
        out[n - 2] = -np.tensordot(_FORWARD_ONE, data[n - 1 : n - 6 : -1] if n > 5 else data[::-1], axes=1)
        return np.moveaxis(out / (12.0 * h), 0, axis)

    @staticmethod
    def richardson_disagreement(values: np.ndarray, h: float, axis: int = 0) -> float:
        """
        Largest difference between derivatives on the grid and on every other node.

        The comparison runs over the even nodes and is scaled by the largest
        derivative magnitude (or 1 when the derivative is small).
        """
        data = np.moveaxis(np.asarray(values, dtype=complex), axis, 0)
        if data.shape[0] < 9:
            raise ValueError(f"Richardson check needs at least 9 grid nodes, got {data.shape[0]}")
        fine = NumericUtils.grid_derivative(data, h)[::2]
        coarse = NumericUtils.grid_derivative(data[::2], 2 * h)
        if fine.size == 0:
            return 0.0
        scale = max(1.0, float(np.max(np.abs(fine))))
        return float(np.max(np.abs(fine - coarse))) / scale

    @staticmethod
    def checked_derivative(
        values: np.ndarray, h: float, axis: int = 0, tolerance: float = RESOLUTION_TOLERANCE
    ) -> np.ndarray:
        """
        grid_derivative guarded by the Richardson check.

        Raises:
            DerivativeResolutionError: If the two grids disagree by more than tolerance
        """
        if np.moveaxis(np.asarray(values), axis, 0).shape[0] >= 9:
            disagreement = NumericUtils.richardson_disagreement(values, h, axis)
            logger.debug(f"Richardson disagreement {disagreement:.3e} at h={h:.3e}")
            if disagreement > tolerance:
                raise DerivativeResolutionError(disagreement)
        return NumericUtils.grid_derivative(values, h, axis)

    @staticmethod
    def circle_nodes(radius: float, count: int, center: complex = 0.0) -> np.ndarray:
        return center + radius * np.exp(2j * np.pi * np.arange(count) / count)

    @staticmethod
    def taylor_coefficients(samples: np.ndarray, radius: float) -> np.ndarray:
        """
        Taylor coefficients a_n of f(A) = sum_n a_n A^n from samples on |A| = radius.

        Args:
            samples: f at circle_nodes(radius, M), sampled along the last axis

        Returns:
            Array of the same shape; entry n along the last axis is a_n
        """
        samples = np.asarray(samples, dtype=complex)
        count = samples.shape[-1]
        coefficients = np.fft.fft(samples, axis=-1) / count
        return coefficients / radius ** np.arange(count)

    @staticmethod
    def spline(t: np.ndarray, values: np.ndarray) -> Tuple[CubicSpline, CubicSpline]:
        """Cubic splines of the real and imaginary parts along the first axis."""
        values = np.asarray(values, dtype=complex)
        return CubicSpline(t, values.real, axis=0), CubicSpline(t, values.imag, axis=0)

    @staticmethod
    def interpolate(t: np.ndarray, values: np.ndarray, t_new) -> np.ndarray:
        re, im = NumericUtils.spline(t, values)
        return re(t_new) + 1j * im(t_new)

    @staticmethod
    def series_product(a: np.ndarray, b: np.ndarray, order: Optional[int] = None) -> np.ndarray:
        """Cauchy product of Taylor series stored along the first axis, truncated at order."""
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        order = min(a.shape[0], b.shape[0]) - 1 if order is None else order
        out = np.zeros((order + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]), dtype=complex)
        for n in range(order + 1):
            for m in range(max(0, n - b.shape[0] + 1), min(n, a.shape[0] - 1) + 1):
                out[n] += a[m] * b[n - m]
        return out

    @staticmethod
    def series_compose(coefficients: np.ndarray, delta: np.ndarray) -> np.ndarray:
        """
        sum_m coefficients[m] delta^m as a series truncated at the order of delta.

        delta must have a vanishing constant term, so powers above its order drop out.
        """
        coefficients = np.asarray(coefficients, dtype=complex)
        delta = np.asarray(delta, dtype=complex)
        order = delta.shape[0] - 1
        shape = np.broadcast_shapes(coefficients.shape[1:], delta.shape[1:])
        top = min(coefficients.shape[0] - 1, order)
        result = np.zeros((order + 1,) + shape, dtype=complex)
        result[0] = coefficients[top]
        for m in range(top - 1, -1, -1):
            result = NumericUtils.series_product(result, delta, order)
            result[0] += coefficients[m]
        return result

    @staticmethod
    def hermite_integral(left: np.ndarray, right: np.ndarray, h: float) -> np.ndarray:
        """
        Integral over [t, t + h] of the polynomial matching two Taylor expansions.

        Args:
            left: Taylor coefficients about t, shape (q + 1, ...)
            right: Taylor coefficients about t + h, same shape

        Returns:
            Integral with the trailing shape; exact for polynomials of degree 2q + 1
        """
        left = np.asarray(left, dtype=complex)
        right = np.asarray(right, dtype=complex)
        q = left.shape[0] - 1
        powers = np.arange(2 * q + 2)
        matrix = np.zeros((2 * q + 2, 2 * q + 2))
        for m in range(q + 1):
            matrix[m, m] = 1.0
            matrix[q + 1 + m] = special.comb(powers, m)
        weights = linalg.solve(matrix.T, 1.0 / (powers + 1))
        scale = (h ** np.arange(q + 1)).reshape((q + 1,) + (1,) * (left.ndim - 1))
        data = np.concatenate([left * scale, right * scale])
        return h * np.tensordot(weights, data, axes=1)
