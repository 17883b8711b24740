"""
Unit tests for the numeric kernels: grid derivatives, power-series arithmetic
and Hermite quadrature.
"""

import math

import numpy as np
from numpy.polynomial import Polynomial

from utils.numeric_utils import NumericUtils

EXP = np.array([1.0 / math.factorial(m) for m in range(7)])


def taylor_at(poly: Polynomial, a: float, order: int) -> np.ndarray:
    """Taylor coefficients p^(m)(a) / m! for m = 0..order."""
    return np.array([poly.deriv(m)(a) / math.factorial(m) for m in range(order + 1)], dtype=complex)


class TestGridDerivative:
    """Test cases for grid_derivative and the Richardson check."""

    def test_quartic_is_exact(self):
        t = np.linspace(0.0, 1.0, 11)
        h = t[1] - t[0]
        derivative = NumericUtils.grid_derivative(t**4 - 2 * t, h)
        assert np.max(np.abs(derivative - (4 * t**3 - 2))) < 1e-10

    def test_empty_data_is_resolved(self):
        """A model without roots has no coefficients to differentiate."""
        assert NumericUtils.richardson_disagreement(np.zeros((9, 0, 3)), 0.1) == 0.0


class TestSeriesArithmetic:
    """Test cases for series_product and series_compose."""

    def test_geometric_inverse(self):
        geometric = np.array([1.0, -1.0, 1.0, -1.0, 1.0])
        product = NumericUtils.series_product(np.array([1.0, 1.0]), geometric, order=4)
        assert np.max(np.abs(product - [1, 0, 0, 0, 0])) < 1e-15

    def test_product_broadcasts_trailing_axes(self):
        a = np.array([[1.0, 2.0], [3.0, 0.5]])
        b = np.array([[2.0], [1.0]])
        product = NumericUtils.series_product(a, b)
        assert product.shape == (2, 2)
        assert np.allclose(product[1], a[0] * b[1] + a[1] * b[0])

    def test_exp_of_log(self):
        """exp(log(1 + x)) = 1 + x."""
        log = np.array([0.0, 1.0, -1 / 2, 1 / 3, -1 / 4, 1 / 5, -1 / 6])
        composed = NumericUtils.series_compose(EXP, log)
        assert np.max(np.abs(composed - [1, 1, 0, 0, 0, 0, 0])) < 1e-14

    def test_scaled_argument(self):
        delta = np.zeros(7, dtype=complex)
        delta[1] = 2j
        composed = NumericUtils.series_compose(EXP, delta)
        assert np.max(np.abs(composed - EXP * (2j) ** np.arange(7))) < 1e-13

    def test_compose_truncates_at_delta_order(self):
        composed = NumericUtils.series_compose(EXP, np.array([0.0, 1.0, 0.0]))
        assert composed.shape == (3,)
        assert np.allclose(composed, EXP[:3])


class TestHermiteIntegral:
    """Test cases for hermite_integral."""

    def test_quintic_exact(self):
        poly = Polynomial([1.0, 0.0, 0.0, -2.0, 0.0, 1.0])
        a, h = 0.3, 0.7
        left, right = taylor_at(poly, a, 2), taylor_at(poly, a + h, 2)
        exact = poly.integ()(a + h) - poly.integ()(a)
        assert abs(NumericUtils.hermite_integral(left, right, h) - exact) < 1e-12

    def test_trailing_shape(self):
        first = Polynomial([0.5, 1.0, -1.0, 0.25])
        second = Polynomial([0.0, 2.0])
        a, h = -0.2, 0.4
        left = np.stack([taylor_at(first, a, 1), taylor_at(second, a, 1)], axis=1)
        right = np.stack([taylor_at(first, a + h, 1), taylor_at(second, a + h, 1)], axis=1)
        result = NumericUtils.hermite_integral(left, right, h)
        exact = [p.integ()(a + h) - p.integ()(a) for p in (first, second)]
        assert result.shape == (2,)
        assert np.max(np.abs(result - exact)) < 1e-13

    def test_chained_steps_follow_exponential(self):
        """Summing steps with jets of exp(t) recovers exp(1) - 1."""
        nodes = np.linspace(0.0, 1.0, 5)
        jets = [np.exp(t) * EXP[:4] for t in nodes]
        total = sum(NumericUtils.hermite_integral(jets[k], jets[k + 1], nodes[k + 1] - nodes[k]) for k in range(4))
        assert abs(total - (np.e - 1)) < 1e-11
