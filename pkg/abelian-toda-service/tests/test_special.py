"""
Unit tests for the special-function layer.

Theta series and Kummer coordinates are compared with brute-force box sums,
the Weierstrass functions with Lambert series and truncated lattice products.
"""

import math

import numpy as np
import pytest

from exceptions import PoleError, PrecisionUnreachableError, QuasiPeriodError
from special.oracles import (
    brute_force_theta,
    lambert_eta1,
    lambert_zeta,
    lattice_product_sigma,
    lattice_sum_zeta,
)
from special.theta import (
    Characteristic,
    RiemannMatrix,
    half_characteristics,
    kummer_coordinates,
    kummer_map,
    riemann_theta,
    theta_char,
)
from special.weierstrass import EllipticLattice, weierstrass


def random_points(rng, count, g, spread=0.3):
    return rng.uniform(-0.5, 0.5, (count, g)) + 1j * rng.uniform(-spread, spread, (count, g))


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


class TestRiemannMatrix:
    """Construction checks for Riemann matrices."""

    def test_rejects_non_positive_imaginary_part(self):
        """Im B must be positive definite."""
        with pytest.raises(ValueError):
            RiemannMatrix([[1.0 + 0.0j]])
        with pytest.raises(ValueError):
            RiemannMatrix([[1j, 2j], [2j, 1j]])

    def test_rejects_asymmetric_matrix(self):
        """Symmetry is checked exactly as stored."""
        with pytest.raises(ValueError):
            RiemannMatrix([[1j, 0.1], [0.2, 1j]])

    def test_from_pairs(self):
        """Config pairs map to complex entries."""
        B = RiemannMatrix.from_pairs([[[0.0, 1.0]]])
        assert B.g == 1
        assert B.entries[0, 0] == 1j


class TestRiemannTheta:
    """Test cases for riemann_theta."""

    def test_known_value_at_origin(self, riemann_g1):
        """theta(0 | i) equals the Gaussian lattice sum."""
        value = riemann_theta([0.0], riemann_g1)
        assert abs(value - 1.086434811213308) < 1e-14, f"Got {value}"

    @pytest.mark.parametrize("genus", [1, 2, 3])
    def test_matches_brute_force(self, genus, rng, riemann_g1, riemann_g2, riemann_g3):
        """Truncated sum agrees with the radius-30 box sum."""
        B = {1: riemann_g1, 2: riemann_g2, 3: riemann_g3}[genus]
        count = 100 if genus < 3 else 20
        points = random_points(rng, count, genus)
        values = riemann_theta(points, B)
        for z, value in zip(points, values):
            expected = brute_force_theta(z, B.entries)
            assert rel(value, expected) < 1e-12, f"z={z}: {value} vs {expected}"

    def test_even_function(self, rng, riemann_g2):
        """theta(-z) = theta(z)."""
        points = random_points(rng, 50, 2)
        plus = riemann_theta(points, riemann_g2)
        minus = riemann_theta(-points, riemann_g2)
        assert np.max(np.abs(plus - minus) / np.abs(plus)) < 1e-14

    def test_integer_shift_invariance(self, rng, riemann_g2):
        """theta(z + e_j) = theta(z)."""
        points = random_points(rng, 20, 2)
        base = riemann_theta(points, riemann_g2)
        for j in range(2):
            shifted = riemann_theta(points + np.eye(2)[j], riemann_g2)
            assert np.max(np.abs(shifted - base) / np.abs(base)) < 1e-14

    def test_quasi_periodicity(self, rng, riemann_g2):
        """theta(z + B_j) exp(pi i B_jj + 2 pi i z_j) = theta(z)."""
        points = random_points(rng, 20, 2)
        base = riemann_theta(points, riemann_g2)
        for j in range(2):
            column = riemann_g2.column(j)
            shifted = riemann_theta(points + column, riemann_g2)
            factor = np.exp(1j * np.pi * column[j] + 2j * np.pi * points[:, j])
            assert np.max(np.abs(shifted * factor - base) / np.abs(base)) < 1e-12

    def test_directional_derivative_matches_finite_difference(self, rng, riemann_g2):
        """Term-wise derivative agrees with a central difference of step 1e-5."""
        direction = np.array([0.4 - 0.1j, -0.7 + 0.2j])
        h = 1e-5
        for z in random_points(rng, 10, 2):
            analytic = riemann_theta(z, riemann_g2, [direction])
            numeric = (riemann_theta(z + h * direction, riemann_g2) - riemann_theta(z - h * direction, riemann_g2)) / (
                2 * h
            )
            assert rel(analytic, numeric) < 1e-7, f"z={z}: {analytic} vs {numeric}"

    def test_second_derivative_along_line(self, riemann_g1):
        """d^2/dt^2 theta(tV) at t = 0 equals the differentiated box sum."""
        V = [0.3]
        value = riemann_theta([0.0], riemann_g1, [V, V])
        expected = brute_force_theta([0.0], riemann_g1.entries, derivatives=[V, V])
        assert rel(value, expected) < 1e-12

    def test_precision_unreachable(self):
        """A nearly degenerate Im B needs a radius beyond the cap."""
        with pytest.raises(PrecisionUnreachableError):
            riemann_theta([0.1], RiemannMatrix([[1e-4j]]))


class TestThetaCharacteristic:
    """Test cases for theta_char."""

    def test_zero_characteristic_is_riemann_theta(self, rng, riemann_g2):
        """[0, 0] reduces to the plain theta function."""
        points = random_points(rng, 20, 2)
        zero = Characteristic([0, 0], [0, 0])
        assert np.max(np.abs(theta_char(zero, points, riemann_g2) - riemann_theta(points, riemann_g2))) < 1e-14

    def test_odd_characteristic_vanishes_at_origin(self, riemann_g1):
        """theta[1/2, 1/2](0) = 0."""
        odd = Characteristic([0.5], [0.5])
        assert odd.is_odd()
        assert abs(theta_char(odd, [0.0], riemann_g1)) < 1e-15

    def test_matches_brute_force(self, rng, riemann_g2):
        """All sixteen characteristics agree with direct summation."""
        z = random_points(rng, 1, 2)[0]
        for eps in half_characteristics(2):
            for delta in half_characteristics(2):
                value = theta_char(Characteristic(eps, delta), z, riemann_g2)
                expected = brute_force_theta(z, riemann_g2.entries, eps, delta)
                assert abs(value - expected) <= 1e-12 * max(abs(expected), 1.0), f"eps={eps}, delta={delta}"

    def test_rejects_non_half_integer(self):
        with pytest.raises(ValueError):
            Characteristic([0.25], [0.0])


class TestKummerMap:
    """Test cases for the level-two Kummer map."""

    def test_genus_one_matches_direct_sums(self, riemann_g1):
        """g = 1 image is the pair of level-two thetas at Z = 0."""
        image = kummer_map([0.0], riemann_g1)
        raw = [brute_force_theta([0.0], 2 * riemann_g1.entries, eps) for eps in ([0.0], [0.5])]
        expected = np.array(raw) / raw[int(np.argmax(np.abs(raw)))]
        assert np.max(np.abs(image - expected)) < 1e-13
        assert np.max(np.abs(image)) == pytest.approx(1.0)

    def test_even_in_argument(self, rng, riemann_g2):
        """K(Z) = K(-Z) projectively."""
        for Z in random_points(rng, 10, 2):
            assert np.max(np.abs(kummer_map(Z, riemann_g2) - kummer_map(-Z, riemann_g2))) < 1e-13

    def test_genus_two_matches_direct_sums(self, rng, riemann_g2):
        """Four components agree with box sums."""
        Z = random_points(rng, 1, 2)[0]
        coords = kummer_coordinates(Z, riemann_g2)
        for eps, value in zip(half_characteristics(2), coords):
            expected = brute_force_theta(2 * Z, 2 * riemann_g2.entries, eps)
            assert rel(value, expected) < 1e-12

    def test_derivative_row(self, rng, riemann_g2):
        """Directional derivative row matches a finite difference of K."""
        Z = random_points(rng, 1, 2)[0]
        V = np.array([0.3 + 0.1j, -0.2])
        h = 1e-5
        row = kummer_coordinates(Z, riemann_g2, direction=V)
        numeric = (kummer_coordinates(Z + h * V, riemann_g2) - kummer_coordinates(Z - h * V, riemann_g2)) / (2 * h)
        assert np.max(np.abs(row - numeric)) < 1e-7 * np.max(np.abs(row))


class TestWeierstrass:
    """Test cases for sigma, zeta and the lattice quasi-periods."""

    def test_legendre_relation(self, lattice):
        """eta1 omega2 - eta2 omega1 = pi i / 2."""
        assert lattice.legendre_residual < 1e-12

    def test_rejects_negative_orientation(self):
        with pytest.raises(ValueError):
            EllipticLattice(0.5, -0.5j)

    def test_broken_legendre_relation_rejected(self, mocker):
        """A wrong eta2 makes the lattice refuse to build."""
        mocker.patch.object(EllipticLattice, "_zeta_unchecked", return_value=np.array([0.3 + 0j]))
        with pytest.raises(QuasiPeriodError) as info:
            EllipticLattice(0.5, 0.1 + 0.55j)
        assert info.value.residual > 1e-3

    def test_eta1_against_lambert_series(self, lattice):
        assert rel(lattice.eta1, lambert_eta1(lattice.omega1, lattice.omega2)) < 1e-12

    def test_odd_functions(self, rng, lattice):
        """sigma and zeta are odd."""
        for z in random_points(rng, 50, 1)[:, 0]:
            sigma, zeta = weierstrass(z, lattice)
            sigma_m, zeta_m = weierstrass(-z, lattice)
            assert rel(sigma, -sigma_m) < 1e-12
            assert rel(zeta, -zeta_m) < 1e-12

    def test_normalization_at_origin(self, lattice):
        """sigma(z)/z -> 1."""
        z = 1e-4
        assert abs(lattice.sigma(z) / z - 1) < 1e-7

    def test_sigma_vanishes_on_lattice(self, lattice):
        assert lattice.sigma(0.0) == 0
        assert lattice.sigma(2 * lattice.omega2) == 0

    def test_quasi_periodicity(self, rng, lattice):
        """sigma(z + 2 omega) = -exp(2 eta (z + omega)) sigma(z) for both generators."""
        for z in random_points(rng, 20, 1)[:, 0]:
            for omega, eta in ((lattice.omega1, lattice.eta1), (lattice.omega2, lattice.eta2)):
                lhs = lattice.sigma(z + 2 * omega)
                rhs = -np.exp(2 * eta * (z + omega)) * lattice.sigma(z)
                assert rel(lhs, rhs) < 1e-11

    @pytest.mark.parametrize("a,b", [(1, 1), (-1, 2), (2, -1)])
    def test_general_quasi_period_factor(self, a, b, lattice):
        z = 0.17 + 0.09j
        shifted = lattice.sigma(z + lattice.lattice_point(a, b))
        assert rel(shifted, lattice.quasi_period_factor(z, a, b) * lattice.sigma(z)) < 1e-11

    def test_against_lattice_oracles(self, lattice):
        """Truncated product and sum agree at their own accuracy."""
        for z in (0.21 + 0.07j, -0.13 + 0.3j):
            assert rel(lattice.sigma(z), lattice_product_sigma(z, lattice.omega1, lattice.omega2)) < 1e-4
            assert rel(lattice.zeta(z), lattice_sum_zeta(z, lattice.omega1, lattice.omega2)) < 1e-4

    def test_zeta_against_lambert_series(self, rng, lattice):
        for z in random_points(rng, 20, 1)[:, 0]:
            assert rel(lattice.zeta(z), lambert_zeta(z, lattice.omega1, lattice.omega2)) < 1e-12

    def test_wp_is_minus_zeta_derivative(self, lattice):
        z = 0.23 - 0.11j
        h = 1e-5
        numeric = -(lattice.zeta(z + h) - lattice.zeta(z - h)) / (2 * h)
        assert rel(lattice.wp(z), numeric) < 1e-7

    def test_sigma_derivatives_consistent(self, lattice):
        """sigma' / sigma equals zeta."""
        z = np.array([0.3 + 0.1j, -0.2 + 0.4j])
        derivs = lattice.sigma_derivatives(z, 2)
        assert np.max(np.abs(derivs[1] / derivs[0] - lattice.zeta(z))) < 1e-12

    def test_pole_error(self, lattice):
        """zeta raises near lattice points."""
        with pytest.raises(PoleError):
            lattice.zeta(0.0)
        with pytest.raises(PoleError):
            lattice.zeta(2 * lattice.omega1 + 1e-14)

    def test_distance_to_lattice(self, lattice):
        assert lattice.distance_to_lattice(2 * lattice.omega1 + 2 * lattice.omega2 + 0.01) == pytest.approx(0.01)
        assert math.isclose(float(lattice.distance_to_lattice(0.0)), 0.0)
