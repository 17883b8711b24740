"""
Unit tests for truncated series arithmetic.
"""

import numpy as np
import pytest

from exceptions import SingularJetError
from jets.jet import Jet, jet_arith


def random_jet(rng, depth=8, lead=0, unit=True):
    coeffs = rng.normal(size=depth + 1) + 1j * rng.normal(size=depth + 1)
    if unit:
        coeffs[0] = 1.0
    return Jet(lead, coeffs)


class TestJetArithmetic:
    """Test cases for jet_arith."""

    def test_difference_of_squares(self):
        """(1 + a/k)(1 - a/k) = 1 - a^2/k^2."""
        a = 0.7 - 0.2j
        product = jet_arith(Jet(0, [1, a, 0, 0]), Jet(0, [1, -a, 0, 0]), "mul")
        expected = Jet(0, [1, 0, -(a**2), 0])
        assert product.max_abs_difference(expected) < 1e-15
        assert product.depth == 3

    def test_inverse_by_long_division(self):
        """1/(1 + 1/k) = 1 - 1/k + 1/k^2 - ..."""
        inverse = jet_arith(Jet.constant(1, 4), Jet(0, [1, 1, 0, 0, 0]), "div")
        assert np.allclose(inverse.coeffs, [1, -1, 1, -1, 1], atol=0, rtol=0)

    def test_exp_log_round_trip(self, rng):
        """exp(log j) = j for unit jets."""
        for _ in range(10):
            jet = random_jet(rng)
            back = jet_arith(jet_arith(jet, op="log"), op="exp")
            assert back.max_abs_difference(jet) < 1e-13

    def test_ring_axioms(self, rng):
        """Associativity and distributivity on random jets."""
        a, b, c = (random_jet(rng, unit=False) for _ in range(3))
        assert ((a * b) * c).max_abs_difference(a * (b * c)) < 1e-13
        assert (a * (b + c)).max_abs_difference(a * b + a * c) < 1e-13

    def test_inverse_is_exact_within_depth(self, rng):
        jet = random_jet(rng, unit=False)
        product = jet * jet.inverse()
        assert product.max_abs_difference(Jet.constant(1, jet.depth)) < 1e-10
        assert product.floor == jet.floor - jet.lead

    def test_common_depth_is_minimum(self):
        """Combining depths 2 and 5 keeps depth 2."""
        short = Jet(0, [1, 2, 3])
        long = Jet(0, [1, 1, 1, 1, 1, 1])
        assert (short + long).depth == 2
        assert (short * long).depth == 2

    def test_scale_shift(self):
        jet = jet_arith(Jet(0, [1, 2]), op="scale_shift", alpha=3.0, power=2)
        assert jet.lead == 2
        assert jet.coefficient(1) == 6

    def test_exp_of_negative_lead(self):
        """exp(c/k) = 1 + c/k + c^2/(2k^2) + ..."""
        c = 0.5
        result = Jet(-1, [c, 0, 0]).exp()
        assert result.lead == 0
        assert np.allclose(result.coeffs, [1, c, c * c / 2, c**3 / 6])

    def test_exp_rejects_positive_lead(self):
        with pytest.raises(ValueError):
            Jet(1, [1.0]).exp()

    def test_singular_division(self):
        """Zero leading coefficient is rejected."""
        with pytest.raises(SingularJetError):
            jet_arith(Jet.constant(1, 2), Jet(0, [0, 1, 0]), "div")
        with pytest.raises(SingularJetError):
            Jet(0, [0, 1]).log()

    def test_floor_below_is_an_error(self):
        with pytest.raises(ValueError):
            Jet(0, [1, 2]).coefficient(-2)

    def test_dict_round_trip(self):
        jet = Jet(-1, [1 + 2j, 3])
        assert Jet.from_dict(jet.to_dict()).max_abs_difference(jet) == 0
