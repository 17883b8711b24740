"""
Unit tests for the wave recursion: first step, exact genus-one waves, the
elliptic solver and the discrete residue checks.
"""

import numpy as np
import pytest

from exceptions import NoSimplePoleSolutionError, NormalizationImpossibleError
from residuals.secancy import SecancyData
from rsdyn.integrator import integrate
from rsdyn.particles import ParticleState
from taumodels.elliptic_tau import EllipticPolynomialTau
from taumodels.theta_tau import ThetaTau
from taumodels.trajectories import FrozenRoots, PolynomialPath
from waverec.elliptic_wave import BlochLayers, ContinuousEllipticWave, DiscreteEllipticWave
from waverec.first_step import normalizing_form, verify_first_step
from waverec.recursion import solve_recursion_elliptic
from waverec.residues import verify_discrete_residues
from waverec.wave_series import WaveSeries

U1 = 0.17 - 0.08j
V1 = 0.43 + 0.2j
W1 = 0.13 + 0.05j
Z0 = 0.07 + 0.03j
X0 = 0.1 + 0.05j
VEL = 0.6 + 0.1j
PROBES = np.array([-0.2 + 0.3j, 0.05 - 0.3j, -0.35 - 0.1j])


def away_from(lattice, points, poles, distance=0.08):
    """Keep the points whose lattice distance to every pole exceeds distance."""
    gaps = lattice.distance_to_lattice(points[:, None] - np.asarray(poles)[None, :])
    return points[np.min(gaps, axis=1) > distance]


@pytest.fixture(scope="module")
def free_series(lattice):
    model = EllipticPolynomialTau(lattice, PolynomialPath([X0], [VEL]))
    return solve_recursion_elliptic(model, U1, 4, np.linspace(0.0, 0.5, 17))


@pytest.fixture(scope="module")
def pair_state(lattice):
    return ParticleState([0.15 + 0.1j, -0.15 - 0.05j], [0.2 + 0.05j, -0.1 + 0.1j], lattice, U1)


class TestFirstStep:
    """Test cases for verify_first_step and the normalizing form."""

    def test_theta_model(self, riemann_g1):
        model = ThetaTau(riemann_g1, {"t": [V1]}, z0=[Z0])
        report = verify_first_step(model, [1j], [U1], samples=60)
        assert report.max_residual < 1e-8, f"first step residual {report.max_residual:.3e}"
        assert report.extra["normalized_B1"] < 1e-10
        assert abs(report.extra["b"] + 2 * np.pi * V1 * U1) < 1e-9

    def test_elliptic_pair(self, lattice):
        velocities = [0.4, -0.3 + 0.2j]
        model = EllipticPolynomialTau(lattice, PolynomialPath([0.1 + 0.05j, -0.2 + 0.1j], velocities))
        lam = 2 * lattice.omega1
        report = verify_first_step(model, [lam], [U1], samples=40)
        ell = report.extra["linear_form"][0]
        expected = -2 * lattice.eta1 * sum(velocities)
        assert abs(report.extra["b"] * ell * lam - expected) < 1e-9
        assert report.extra["b_spread"] < 1e-10
        assert abs(report.extra["B1_generator0"]) < 1e-9
        assert report.max_residual < 1e-8

    def test_default_form_is_normalized(self):
        ell = normalizing_form([0.3 + 0.1j, -0.2j], [1.0, 0.5j])
        assert abs(ell @ np.array([0.3 + 0.1j, -0.2j]) - 1) < 1e-14

    def test_form_repaired_when_orthogonal(self):
        """The default form vanishes on lam1 here and gets corrected."""
        ell = normalizing_form([1.0, 0.0], [0.0, 1.0])
        assert abs(ell[0] - 1) < 1e-14
        assert abs(ell[1]) > 0.5

    def test_vanishing_form_rejected(self):
        with pytest.raises(NormalizationImpossibleError):
            normalizing_form([1.0, 0.0], [0.0, 1.0], ell=[1.0, 0.0])

    def test_zero_period_rejected(self, lattice):
        model = EllipticPolynomialTau(lattice, PolynomialPath([X0], [VEL]))
        with pytest.raises(NormalizationImpossibleError):
            verify_first_step(model, [0.0], [U1])

    def test_form_must_fix_shift(self):
        with pytest.raises(ValueError):
            normalizing_form([1.0], [1.0], ell=[2.0])


class TestExactWaves:
    """Test cases for the contour-built genus-one waves."""

    def test_layers_start_with_zeta(self, lattice):
        layers = BlochLayers(lattice, 3)
        y = np.array([0.21 + 0.13j, -0.3 + 0.05j])
        f = layers.values(y)
        c = lattice.eta1 / lattice.omega1
        assert np.max(np.abs(f[0] - 1)) < 1e-12
        assert np.max(np.abs(f[1] - (lattice.zeta(y) - c * y))) < 1e-10

    def test_layers_periodic_in_first_period(self, lattice):
        layers = BlochLayers(lattice, 4)
        y = np.array([0.21 + 0.13j, -0.3 + 0.05j])
        shifted = layers.values(y + 2 * lattice.omega1)
        assert np.max(np.abs(shifted - layers.values(y))) < 1e-9

    def test_layer_derivative(self, lattice):
        layers = BlochLayers(lattice, 3)
        y = np.array([0.21 + 0.13j])
        h = 1e-5
        _, f_y = layers.values_and_derivatives(y)
        numeric = (layers.values(y + h) - layers.values(y - h)) / (2 * h)
        assert np.max(np.abs(f_y - numeric)) < 1e-7

    def test_layer_jets_sum_to_nearby_values(self, lattice):
        layers = BlochLayers(lattice, 3)
        y = np.array([0.21 + 0.13j, -0.3 + 0.05j])
        jets = layers.taylor(y, 8)
        step = 0.01 - 0.004j
        summed = np.einsum("jmn,m->jn", jets, step ** np.arange(9))
        assert jets.shape == (4, 9, 2)
        assert np.max(np.abs(summed - layers.values(y + step))) < 1e-9

    def test_layer_jets_start_with_values(self, lattice):
        layers = BlochLayers(lattice, 3)
        y = np.array([0.21 + 0.13j])
        jets = layers.taylor(y, 2)
        f, f_y = layers.values_and_derivatives(y)
        assert np.max(np.abs(jets[:, 0] - f)) < 1e-10
        assert np.max(np.abs(jets[:, 1] - f_y)) < 1e-8

    def test_layer_jet_order_limited_by_circle(self, lattice):
        with pytest.raises(ValueError):
            BlochLayers(lattice, 2).taylor(np.array([0.2 + 0.1j]), 30, count=32)

    def test_pole_weights(self, lattice):
        weights = BlochLayers(lattice, 4).pole_weights()
        assert abs(weights[1] - 1) < 1e-12
        assert np.max(np.abs(weights[2:5])) < 1e-10

    def test_continuous_leading_coefficient(self, lattice):
        wave = ContinuousEllipticWave(lattice, U1, X0, VEL)
        assert np.max(np.abs(wave.xi(0, PROBES, 0.2) - 1)) < 1e-9

    def test_continuous_recursion(self, lattice, rng):
        wave = ContinuousEllipticWave(lattice, U1, X0, VEL)
        t = 0.2
        x = wave.positions(t)[0]
        z = x + 0.4 * (rng.uniform(-1, 1, 40) + 1j * rng.uniform(-1, 1, 40))
        z = away_from(lattice, z, [x, x - U1])[:10]
        u = wave.potential(z, t)
        for s in range(4):
            lhs = wave.xi(s + 1, z + U1, t) - wave.xi(s + 1, z, t)
            rhs = wave.xi_dot(s, z, t) + (u + wave.b) * wave.xi(s, z, t)
            defect = np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))
            assert defect < 1e-8, f"order {s + 1}: recursion defect {defect:.3e}"

    def test_continuous_first_coefficient_is_periodic(self, lattice):
        wave = ContinuousEllipticWave(lattice, U1, X0, VEL)
        shift = wave.xi(1, PROBES + 2 * lattice.omega1, 0.1) - wave.xi(1, PROBES, 0.1)
        assert np.max(np.abs(shift)) < 1e-9

    def test_discrete_leading_coefficient(self, lattice):
        wave = DiscreteEllipticWave(lattice, V1, W1, Z0)
        assert np.max(np.abs(wave.xi(0, PROBES, 1.0) - 1)) < 1e-9

    def test_discrete_contour_too_large(self, lattice):
        with pytest.raises(ValueError):
            DiscreteEllipticWave(lattice, V1, W1, Z0, radius=0.9)


class TestRecursionSolver:
    """Test cases for solve_recursion_elliptic."""

    def test_constant_tau_gives_zeros(self, lattice):
        model = EllipticPolynomialTau(lattice, FrozenRoots([]))
        series = solve_recursion_elliptic(model, U1, 2, np.linspace(0.0, 0.5, 9))
        assert series.b == 0
        assert np.all(series.constants[1:] == 0)
        assert np.all(series.xi(2, PROBES, 0.25) == 0)

    def test_free_particle_holdout(self, free_series):
        for s, residual in free_series.diagnostics["holdout"].items():
            assert residual < 1e-8, f"order {s}: holdout residual {residual:.3e}"

    def test_free_particle_monodromy(self, free_series):
        diagnostics = free_series.diagnostics
        assert np.max(np.abs(free_series.monodromy["2omega1"])) < 1e-9
        assert diagnostics["monodromy_drift"]["2omega2"] < 1e-7
        assert diagnostics["monodromy_closure"]["2omega2"] < 1e-8

    def test_first_residue_is_velocity(self, free_series):
        residues = free_series.residues(1, free_series.nodes[5])
        assert abs(residues[0] - VEL) < 1e-10

    def test_matches_exact_wave(self, lattice, free_series):
        """Solver and exact wave differ by a z-independent series 1 + C1/k + ..."""
        exact = ContinuousEllipticWave(lattice, U1, X0, VEL)
        t = free_series.nodes[8]
        z = PROBES[:2]
        offset = free_series.xi(1, z, t) - exact.xi(1, z, t)
        assert abs(offset[0] - offset[1]) < 1e-8
        first = exact.xi(1, z, t)
        solved = free_series.xi(2, z, t)
        expected = exact.xi(2, z, t) + offset[0] * first
        assert abs((solved[0] - solved[1]) - (expected[0] - expected[1])) < 1e-7

    def test_gauge_constant_keeps_monodromy(self, lattice, free_series):
        model = EllipticPolynomialTau(lattice, PolynomialPath([X0], [VEL]))
        gauged = solve_recursion_elliptic(model, U1, 4, free_series.nodes, gauge={1: 0.3})
        t = free_series.nodes[4]
        difference = gauged.xi(2, PROBES, t) - free_series.xi(2, PROBES, t)
        first = free_series.xi(1, PROBES, t)
        assert np.max(np.abs(np.diff(difference - 0.3 * first))) < 1e-8
        shift = gauged.monodromy["2omega2"] - free_series.monodromy["2omega2"]
        assert np.max(np.abs(shift)) < 1e-8

    def test_rs_pair(self, lattice, pair_state):
        nodes = np.linspace(0.0, 0.5, 17)
        model = EllipticPolynomialTau(lattice, integrate(pair_state, (0.0, 0.5), nodes=nodes))
        series = solve_recursion_elliptic(model, U1, 4, nodes)
        assert series.diagnostics["pole_dynamics"] < 1e-6
        assert max(series.diagnostics["holdout"].values()) < 1e-8
        assert np.max(np.abs(series.monodromy["2omega1"])) < 1e-9
        assert series.diagnostics["monodromy_drift"]["2omega2"] < 1e-7

    def test_perturbed_dynamics_fail(self, lattice, pair_state):
        nodes = np.linspace(0.0, 0.5, 17)
        trajectory = integrate(pair_state, (0.0, 0.5), nodes=nodes, coupling=1.01)
        model = EllipticPolynomialTau(lattice, trajectory)
        with pytest.raises(NoSimplePoleSolutionError) as info:
            solve_recursion_elliptic(model, U1, 3, nodes)
        assert info.value.step == 2
        assert info.value.residual > 1e-4

    def test_single_node_rejected(self, lattice):
        model = EllipticPolynomialTau(lattice, PolynomialPath([X0], [VEL]))
        with pytest.raises(ValueError):
            solve_recursion_elliptic(model, U1, 2, [0.25])

    def test_unordered_nodes_rejected(self, lattice):
        model = EllipticPolynomialTau(lattice, PolynomialPath([X0], [VEL]))
        with pytest.raises(ValueError):
            solve_recursion_elliptic(model, U1, 2, [0.0, 0.3, 0.2])

    def test_two_close_nodes(self, lattice):
        """Rates come from jets at each node, so no grid stencil is needed."""
        model = EllipticPolynomialTau(lattice, PolynomialPath([X0], [VEL]))
        series = solve_recursion_elliptic(model, U1, 3, [0.0, 0.02])
        for s, residual in series.diagnostics["holdout"].items():
            assert residual < 1e-8, f"order {s}: holdout residual {residual:.3e}"

    def test_rates_follow_exact_wave(self, lattice, free_series):
        """d/dt of solver and exact xi_1 differ by a z-independent amount."""
        exact = ContinuousEllipticWave(lattice, U1, X0, VEL)
        t = free_series.nodes[6]
        offset = free_series.xi_dot(1, PROBES, t) - exact.xi_dot(1, PROBES, t)
        assert np.max(np.abs(offset - offset[0])) < 1e-8

    def test_rates_at_nodes_are_stored(self, free_series):
        data = free_series.to_dict()
        assert data["constant_rates"] is not None
        assert np.asarray(data["layer_rates"]["re"]).shape == free_series.layers.shape

    def test_json_round_trip(self, free_series, temp_dir):
        path = free_series.save(temp_dir / "wave.json")
        loaded = WaveSeries.load(path)
        for t in (free_series.nodes[3], 0.123):
            assert np.max(np.abs(loaded.xi(3, PROBES, t) - free_series.xi(3, PROBES, t))) < 1e-13
        t = free_series.nodes[5]
        assert np.max(np.abs(loaded.xi_dot(2, PROBES, t) - free_series.xi_dot(2, PROBES, t))) < 1e-13
        assert loaded.depth == 4
        assert set(loaded.monodromy) == {"2omega1", "2omega2"}


class TestDiscreteResidues:
    """Test cases for verify_discrete_residues."""

    @staticmethod
    def zeros(lattice, nu):
        shift = Z0 + nu * V1
        return np.array([[lattice.lattice_point(a, b) - shift] for a in (-1, 0) for b in (-1, 0, 1)])

    @pytest.fixture
    def data(self, lattice):
        return SecancyData.from_sigma_discrete(lattice, 0.31 + 0.12j, V1, W1, z0=Z0)

    def test_exact_wave(self, lattice, data):
        wave = DiscreteEllipticWave(lattice, V1, W1, Z0)
        report = verify_discrete_residues(data, wave, [0.0, 1.0, 2.0], lambda nu: self.zeros(lattice, nu))
        assert report.max_residual < 1e-7, f"residue mismatch {report.max_residual:.3e}"
        assert set(report.table["nu"]) == {0.0, 1.0, 2.0}

    def test_leading_order(self, lattice, data):
        wave = DiscreteEllipticWave(lattice, V1, W1, Z0)
        report = verify_discrete_residues(data, wave, [1.0], lambda nu: self.zeros(lattice, nu), orders=(0,))
        assert report.max_residual < 1e-8

    def test_noisy_wave_detected(self, lattice, data):
        wave = DiscreteEllipticWave(lattice, V1, W1, Z0)
        noise = np.random.default_rng(3)

        class NoisyWave:
            def xi(self, s, z, nu):
                value = wave.xi(s, z, nu)
                return value + 1e-3 * (noise.normal(size=value.shape) + 1j * noise.normal(size=value.shape))

        def points(nu):
            return self.zeros(lattice, nu)

        good = verify_discrete_residues(data, wave, [1.0], points)
        bad = verify_discrete_residues(data, NoisyWave(), [1.0], points)
        assert bad.max_residual > 1e2 * good.max_residual
        assert bad.max_residual > 1e-5

    def test_needs_discrete_data(self, lattice):
        d = SecancyData.from_sigma(lattice, [U1], [0.31 + 0.12j], [V1], z0=Z0)
        with pytest.raises(ValueError):
            verify_discrete_residues(d, None, [0.0])
