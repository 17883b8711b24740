"""
Unit tests for the RS particle system, its integration and the divisor correspondence.
"""

import numpy as np
import pytest

from exceptions import CollisionError
from rsdyn.correspondence import correspondence_check, track_zeros
from rsdyn.integrator import fixed_step_endpoint, integrate, time_reversal_defect
from rsdyn.particles import ParticleState, rs_potential, rs_rhs, rs_taylor
from special.oracles import lambert_zeta
from taumodels.elliptic_tau import EllipticPolynomialTau
from taumodels.trajectories import FrozenRoots

KAPPA = 0.17 - 0.08j


@pytest.fixture
def pair_state(lattice):
    return ParticleState([0.15 + 0.1j, -0.15 - 0.05j], [0.2 + 0.05j, -0.1 + 0.1j], lattice, KAPPA)


class TestEquationsOfMotion:
    """Test cases for rs_rhs."""

    def test_single_particle_is_free(self, lattice):
        state = ParticleState([0.1], [0.7 + 0.2j], lattice, KAPPA)
        assert np.all(rs_rhs(state) == 0)

    def test_resting_partner_feels_nothing(self, lattice):
        """Every interaction term carries the partner's velocity."""
        state = ParticleState([0.1 + 0.1j, -0.2], [0.5, 0.0], lattice, KAPPA)
        acc = rs_rhs(state)
        assert acc[0] == 0
        assert acc[1] == 0

    def test_matches_lambert_zeta(self, lattice, pair_state):
        """Term-by-term evaluation with an independent zeta agrees to 1e-10."""
        w1, w2 = lattice.omega1, lattice.omega2

        def V(x):
            return lambert_zeta(x, w1, w2) - lambert_zeta(x + KAPPA, w1, w2)

        x, v = pair_state.x, pair_state.v
        x12 = x[0] - x[1]
        expected = np.array(
            [v[0] * v[1] * (V(x12) - V(-x12)), v[1] * v[0] * (V(-x12) - V(x12))],
        )
        acc = rs_rhs(pair_state)
        assert np.max(np.abs(acc - expected)) < 1e-10 * np.max(np.abs(expected))

    def test_potential_is_not_odd(self, lattice):
        x = np.array([0.23 + 0.04j])
        assert abs(rs_potential(lattice, x, KAPPA)[0] + rs_potential(lattice, -x, KAPPA)[0]) > 1e-3
        assert abs(rs_potential(lattice, x, KAPPA)[0] - rs_potential(lattice, -x, KAPPA)[0]) > 1e-3

    def test_coupling_scales_interaction(self, pair_state):
        assert np.allclose(rs_rhs(pair_state, 1.01), 1.01 * rs_rhs(pair_state))

    def test_collision_detected(self, lattice):
        state = ParticleState([0.1, 0.1], [0.2, 0.3], lattice, KAPPA)
        with pytest.raises(CollisionError):
            rs_rhs(state)

    def test_shifted_collision_detected(self, lattice):
        state = ParticleState([0.1 + KAPPA, 0.1], [0.2, 0.3], lattice, KAPPA)
        with pytest.raises(CollisionError) as info:
            rs_rhs(state)
        assert set(info.value.pair) == {0, 1}

    def test_mismatched_shapes(self, lattice):
        with pytest.raises(ValueError):
            ParticleState([0.1, 0.2], [0.3], lattice, KAPPA)


class TestIntegration:
    """Test cases for the RK45 integration."""

    def test_single_particle_straight_line(self, lattice):
        state = ParticleState([0.1 + 0.05j], [0.6 + 0.1j], lattice, KAPPA)
        trajectory = integrate(state, (0.0, 1.0))
        expected = state.x + state.v * trajectory.nodes[:, None]
        positions = np.array([trajectory.positions(t) for t in trajectory.nodes])
        assert np.max(np.abs(positions - expected)) < 1e-10

    def test_time_reversal(self, pair_state):
        assert time_reversal_defect(pair_state, 1.0) < 1e-7

    def test_velocity_sum_conserved(self, pair_state):
        trajectory = integrate(pair_state, (0.0, 1.0))
        assert trajectory.velocity_sum_drift() < 1e-8

    def test_symmetric_data_stays_symmetric(self, lattice):
        state = ParticleState([0.2 + 0.1j, -0.2 - 0.1j], [0.1 + 0.2j, -0.1 - 0.2j], lattice, KAPPA)
        trajectory = integrate(state, (0.0, 1.0))
        centre = [abs(np.sum(trajectory.positions(t))) for t in trajectory.nodes]
        assert max(centre) < 1e-8

    def test_table_columns(self, pair_state):
        trajectory = integrate(pair_state, (0.0, 0.5), nodes=[0.0, 0.25, 0.5])
        assert list(trajectory.table.columns) == [
            "t", "re_x0", "im_x0", "re_x1", "im_x1", "re_v0", "im_v0", "re_v1", "im_v1"
        ]
        assert len(trajectory.table) == 3

    def test_fixed_step_fifth_order(self, pair_state):
        """Halving the step divides the endpoint error by about 2^5."""
        reference = fixed_step_endpoint(pair_state, 1.0, 128).x
        coarse = np.max(np.abs(fixed_step_endpoint(pair_state, 1.0, 4).x - reference))
        fine = np.max(np.abs(fixed_step_endpoint(pair_state, 1.0, 8).x - reference))
        ratio = coarse / fine
        assert 16 < ratio < 64, f"convergence ratio {ratio:.2f}"

    def test_adaptive_agrees_with_fixed_step(self, pair_state):
        trajectory = integrate(pair_state, (0.0, 1.0), nodes=[1.0])
        reference = fixed_step_endpoint(pair_state, 1.0, 128).x
        assert np.max(np.abs(trajectory.positions(1.0) - reference)) < 1e-8


class TestTaylorJets:
    """Test cases for rs_taylor."""

    def test_leading_coefficients(self, pair_state):
        jets = rs_taylor(pair_state, 4, coupling=1.01)
        assert jets.shape == (5, 2)
        assert np.all(jets[0] == pair_state.x)
        assert np.all(jets[1] == pair_state.v)
        assert np.max(np.abs(2 * jets[2] - rs_rhs(pair_state, 1.01))) < 1e-12

    def test_single_particle_is_linear(self, lattice):
        state = ParticleState([0.1], [0.7 + 0.2j], lattice, KAPPA)
        jets = rs_taylor(state, 5)
        assert np.all(jets[2:] == 0)

    def test_jets_follow_integrated_motion(self, pair_state):
        jets = rs_taylor(pair_state, 8)
        tau = 0.05
        trajectory = integrate(pair_state, (0.0, tau), tol=1e-12, nodes=[0.0, tau])
        summed = jets.T @ tau ** np.arange(9)
        assert np.max(np.abs(summed - trajectory.positions(tau))) < 1e-9

    def test_trajectory_jets_at_later_time(self, pair_state):
        trajectory = integrate(pair_state, (0.0, 0.3), tol=1e-12)
        jets = trajectory.taylor(0.2, 3)
        assert np.max(np.abs(jets[0] - trajectory.positions(0.2))) < 1e-14
        assert np.max(np.abs(2 * jets[2] - trajectory.accelerations(0.2))) < 1e-12


class TestCorrespondence:
    """Test cases for correspondence_check."""

    def test_single_free_particle(self, lattice):
        state = ParticleState([0.1 + 0.05j], [0.6 + 0.1j], lattice, KAPPA)
        trajectory = integrate(state, (0.0, 1.0), nodes=np.linspace(0, 1, 5))
        report = correspondence_check(trajectory, lattice, KAPPA, KAPPA)
        assert report.extra["max_absolute"] < 1e-10
        assert report.extra["zero_tracking"] < 1e-8

    def test_pair_follows_tau_divisor(self, lattice, pair_state):
        trajectory = integrate(pair_state, (0.0, 1.0), nodes=np.linspace(0, 1, 6))
        report = correspondence_check(trajectory, lattice, KAPPA, KAPPA)
        assert report.max_residual < 1e-6, f"rs residual {report.max_residual:.3e}"
        assert report.extra["zero_tracking"] < 1e-8
        assert set(report.table["t"]) == set(trajectory.nodes)

    def test_scaled_coupling_fails(self, lattice, pair_state):
        """Dynamics with the interaction scaled by 1.01 leave the divisor relation."""
        nodes = np.linspace(0, 1, 6)
        good = correspondence_check(integrate(pair_state, (0.0, 1.0), nodes=nodes), lattice, KAPPA, KAPPA, track=False)
        bad = correspondence_check(
            integrate(pair_state, (0.0, 1.0), nodes=nodes, coupling=1.01), lattice, KAPPA, KAPPA, track=False
        )
        assert bad.max_residual > 1e-4
        assert bad.max_residual > 1e3 * good.max_residual

    def test_zeros_found_for_translated_particles(self, lattice):
        """Particles a full period apart still give one zero each in the search box."""
        far = -0.12 + 0.2j + 2 * lattice.omega1 + 2 * lattice.omega2
        model = EllipticPolynomialTau(lattice, FrozenRoots([0.1 + 0.05j, far]))
        assert track_zeros(model, 0.0) < 1e-8

    def test_pair_drifting_a_period_apart(self, lattice):
        """The particles separate by about one period over the run; the zeros are still tracked."""
        state = ParticleState([0.1 + 0.05j, -0.12 + 0.2j], [0.6 + 0.1j, -0.3 + 0.25j], lattice, KAPPA)
        trajectory = integrate(state, (0.0, 1.0), nodes=np.linspace(0, 1, 6))
        report = correspondence_check(trajectory, lattice, KAPPA, KAPPA)
        assert np.isfinite(report.extra["zero_tracking"])
        assert report.extra["zero_tracking"] < 1e-8
