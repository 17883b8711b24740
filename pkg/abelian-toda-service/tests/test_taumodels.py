"""
Unit tests for tau models: partials, monodromy, holomorphy and divisor zeros.
"""

import numpy as np
import pytest

from exceptions import NotASectionError
from special.oracles import brute_force_theta
from special.theta import RiemannMatrix
from taumodels.base_model import monodromy_check, tau_partials
from taumodels.divisor import divisor_zeros
from taumodels.elliptic_tau import EllipticPolynomialTau, SigmaTau
from taumodels.gauge import QuadraticForm
from taumodels.linear_gauge import LinearGauge
from taumodels.theta_tau import ThetaTau
from taumodels.trajectories import FrozenRoots, PolynomialPath, TrajectoryTable


@pytest.fixture
def theta_model(riemann_g2):
    return ThetaTau(
        riemann_g2,
        {"t": [0.31 + 0.05j, -0.22 + 0.1j], "s": [0.1, 0.4]},
        z0=[0.05 + 0.02j, -0.1 + 0.03j],
        gauge=QuadraticForm({("t", "s"): 0.2 + 0.1j, ("t", "t"): -0.3}, {"t": 0.05}),
    )


def rel(a, b):
    return np.max(np.abs(np.asarray(a) - np.asarray(b)) / np.maximum(np.abs(b), 1e-300))


class TestTauPartials:
    """Test cases for tau_partials."""

    def test_theta_partials_match_finite_differences(self, theta_model):
        """Analytic theta partials agree with fourth-order differences."""
        z = np.array([[0.2 + 0.1j, -0.3 + 0.05j], [0.11 - 0.2j, 0.4 + 0.1j]])
        times = {"t": 0.3, "s": -0.2}
        for key in [("t",), ("s",), ("t", "t"), ("t", "s")]:
            analytic = theta_model.partial(z, times, key)
            numeric = theta_model._finite_difference_partial(z, times, key)
            assert rel(numeric, analytic) < 1e-7, f"key={key}"

    def test_second_derivative_along_line(self, riemann_g1):
        """d^2/dt^2 theta(tV) at t = 0 for V = 0.3 equals the differentiated box sum."""
        model = ThetaTau(riemann_g1, {"t": [0.3]})
        value = model.partial([0.0], {"t": 0.0}, ("t", "t"))
        expected = brute_force_theta([0.0], riemann_g1.entries, derivatives=[[0.3], [0.3]])
        assert abs(value - expected) < 1e-12 * abs(expected)

    def test_frozen_roots_move_only_amplitude(self, lattice):
        """With frozen roots d_t tau = (c'/c) tau."""
        amplitude = QuadraticForm({("t", "t"): 0.1}, {"t": 0.3})
        model = EllipticPolynomialTau(lattice, FrozenRoots([0.1, 0.3 + 0.2j]), amplitude)
        z = np.array([0.2 - 0.1j, -0.15 + 0.3j])
        times = {"t": 0.5}
        partials = tau_partials(model, z, times, [(), ("t",)])
        assert rel(partials[("t",)], (0.3 + 0.2 * 0.5) * partials[()]) < 1e-13

    def test_log_derivative_structure(self, lattice):
        """d_t ln tau = c'/c - sum_i x_i' zeta(z - x_i), checked against differences."""
        path = PolynomialPath([0.1 + 0.05j, -0.2 + 0.1j], [0.4, -0.3 + 0.2j], [0.2, 0.1j])
        model = EllipticPolynomialTau(lattice, path, QuadraticForm(linear={"t": 0.7}))
        z = np.array([0.31 + 0.2j, -0.05 - 0.22j])
        times = {"t": 0.25}
        value = model.evaluate(z, times)
        expected = 0.7 - sum(v * lattice.zeta(z - x) for x, v in zip(path.positions(0.25), path.velocities(0.25)))
        assert rel(model.partial(z, times, ("t",)) / value, expected) < 1e-12
        numeric = model._finite_difference_partial(z[:, None], dict(times), ("t",))
        assert rel(numeric / value, expected) < 1e-7
        second = model._finite_difference_partial(z[:, None], dict(times), ("t", "t"))
        assert rel(second, model.partial(z, times, ("t", "t"))) < 1e-7

    def test_sigma_tau_mixed_partial(self, lattice):
        model = SigmaTau(lattice, {"l": 0.13 + 0.02j, "m": -0.07 + 0.05j}, z0=0.1, gauge=QuadraticForm({("l", "m"): 0.4}))
        z = np.array([0.2 + 0.1j])
        times = {"l": 0.5, "m": -0.4}
        analytic = model.partial(z, times, ("l", "m"))
        numeric = model._finite_difference_partial(z[:, None], dict(times), ("l", "m"))
        assert rel(numeric, analytic) < 1e-7

    def test_table_trajectory_interpolates(self, temp_dir):
        """CSV tables feed splines; a quadratic path is reproduced."""
        t = np.linspace(0, 1, 21)
        x = 0.1 + 0.3 * t + 0.5j * t * t
        csv = temp_dir / "roots.csv"
        csv.write_text("t,re_x0,im_x0\n" + "\n".join(f"{a:.17g},{b.real:.17g},{b.imag:.17g}" for a, b in zip(t, x)) + "\n")
        table = TrajectoryTable.from_csv(csv)
        assert table.count == 1
        assert abs(table.positions(0.37)[0] - (0.1 + 0.3 * 0.37 + 0.5j * 0.37**2)) < 1e-6

    def test_rejects_unknown_flow(self, theta_model):
        with pytest.raises(ValueError):
            theta_model.partial([0.0, 0.0], {}, ("x",))


class TestMonodromy:
    """Test cases for monodromy_check."""

    def test_theta_integer_shift(self, theta_model):
        """lam = e_j: a = 0, b = 0."""
        for j in range(2):
            a, b, residual = monodromy_check(theta_model, np.eye(2)[j], {"t": 0.2, "s": 0.1})
            assert np.max(np.abs(a)) < 1e-10
            assert abs(np.exp(b) - 1) < 1e-10
            assert residual < 1e-13

    def test_theta_period_shift(self, theta_model, riemann_g2):
        """lam = B_j: a = -2 pi i e_j and b matches the closed form."""
        times = {"t": 0.2, "s": 0.1}
        for j in range(2):
            column = riemann_g2.column(j)
            a, b, residual = monodromy_check(theta_model, column, times)
            expected_a, expected_b = theta_model.analytic_monodromy(column, times)
            assert np.max(np.abs(a - expected_a)) < 1e-8
            assert abs(np.exp(b) - np.exp(expected_b)) < 1e-8 * abs(np.exp(expected_b))
            assert residual < 1e-11

    def test_elliptic_polynomial_period(self, lattice):
        """lam = 2 omega1: a = 2 N eta1, b = 2 eta1 (N omega1 - sum x) + N pi i."""
        roots = [0.12 + 0.04j, -0.2 + 0.31j]
        model = EllipticPolynomialTau(lattice, FrozenRoots(roots))
        a, b, residual = monodromy_check(model, [2 * lattice.omega1])
        expected_b = 2 * lattice.eta1 * (2 * lattice.omega1 - sum(roots)) + 2j * np.pi
        assert abs(a[0] - 4 * lattice.eta1) < 1e-10 * abs(lattice.eta1)
        assert abs(np.exp(b) - np.exp(expected_b)) < 1e-10 * abs(np.exp(expected_b))
        assert residual < 1e-11

    def test_every_generator_passes(self, theta_model, lattice):
        models = [theta_model, SigmaTau(lattice, {"nu": 0.21 + 0.1j}), LinearGauge(theta_model, [0.3, -0.2j])]
        for model in models:
            for generator in model.lattice_generators:
                _, _, residual = monodromy_check(model, generator, {"t": 0.1, "nu": 0.3})
                assert residual < 1e-11, f"{type(model).__name__}: {residual}"

    def test_not_a_section(self, lattice):
        """A shift that is not a period fails."""
        model = SigmaTau(lattice, {})
        with pytest.raises(NotASectionError):
            monodromy_check(model, [0.37 + 0.1j])

    def test_holomorphic(self, theta_model, lattice, rng):
        probes = 0.3 * (rng.uniform(-1, 1, (5, 2)) + 1j * rng.uniform(-1, 1, (5, 2)))
        assert theta_model.holomorphy_residual(probes, {"t": 0.1}) < 1e-7
        model = EllipticPolynomialTau(lattice, FrozenRoots([0.1, 0.2j]))
        assert model.holomorphy_residual(probes[:, :1]) < 1e-7


class TestDivisorZeros:
    """Test cases for divisor_zeros."""

    def test_known_roots(self, lattice):
        roots = [0.3, 0.7 + 0.2j]
        model = EllipticPolynomialTau(lattice, FrozenRoots(roots))
        result = divisor_zeros(model, ([0.0], [1.0]), {"t": 0.0}, cell=(0.1 - 0.2j, 0.9 + 0.45j))
        assert result.winding == 2
        assert sum(result.multiplicities) == result.winding
        assert np.max(np.abs(np.sort_complex(result.parameters) - np.sort_complex(np.array(roots)))) < 1e-10

    def test_sigma_single_zero(self, lattice):
        """sigma vanishes only on the lattice."""
        result = divisor_zeros(SigmaTau(lattice, {}), ([0.0], [1.0]), cell=(-0.3 - 0.3j, 0.6 + 0.4j))
        assert result.winding == 1
        assert abs(result.parameters[0]) < 1e-12

    def test_theta_count_matches_winding(self, riemann_g1):
        """theta(z | i) along a generic line."""
        model = ThetaTau(riemann_g1, {})
        result = divisor_zeros(model, ([0.05], [0.8 + 0.3j]), cell=(-0.6 - 0.7j, 1.4 + 1.3j))
        assert sum(result.multiplicities) == result.winding
        assert result.winding >= 1
        for z in result.points([0.05], [0.8 + 0.3j]):
            assert abs(model.evaluate(z)) < 1e-10

    def test_double_zero(self, lattice):
        model = EllipticPolynomialTau(lattice, FrozenRoots([0.2 + 0.1j, 0.2 + 0.1j]))
        result = divisor_zeros(model, ([0.0], [1.0]), cell=(-0.1 - 0.2j, 0.6 + 0.4j))
        assert result.winding == 2
        assert sum(result.multiplicities) == 2
        assert np.max(np.abs(result.parameters - (0.2 + 0.1j))) < 1e-6

    def test_rejects_zero_direction(self, lattice):
        with pytest.raises(ValueError):
            divisor_zeros(SigmaTau(lattice, {}), ([0.0], [0.0]))
