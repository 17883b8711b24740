"""
Elliptic tau functions built from the Weierstrass sigma function.

SigmaTau is a single shifted sigma, tau(z, t) = exp(Q(t)) sigma(z + z0 + sum_a t_a u_a);
it covers the genus-one continuous, discrete and BDHE families.
EllipticPolynomialTau is exp(Q(t)) prod_i sigma(z - x_i(t)) with roots from a
trajectory source.
"""

import logging
from typing import Dict, List, Mapping, Optional

import numpy as np

from special.weierstrass import EllipticLattice
from taumodels.base_model import PartialKey, TauModel, Times
from taumodels.gauge import QuadraticForm, gauge_partials
from taumodels.trajectories import TrajectorySource

logger = logging.getLogger(__name__)


class _EllipticModel(TauModel):
    """Shared lattice bookkeeping for d = 1 sigma-based models."""

    def __init__(self, lattice: EllipticLattice, flows, **kwargs):
        super().__init__(1, flows, **kwargs)
        self.lattice = lattice

    @property
    def scale(self) -> float:
        return self.lattice.diameter

    @property
    def lattice_generators(self) -> List[np.ndarray]:
        return [np.array([g]) for g in self.lattice.generators]


class SigmaTau(_EllipticModel):
    """
    tau(z, t) = exp(Q(t)) sigma(z + z0 + sum_a t_a u_a).

    Args:
        lattice: Elliptic lattice
        flows: Map from flow name to its complex shift u_a
        z0: Base shift
        gauge: Quadratic form Q in the flows
    """

    def __init__(
        self,
        lattice: EllipticLattice,
        flows: Mapping[str, complex],
        z0: complex = 0.0,
        gauge: Optional[QuadraticForm] = None,
        **kwargs,
    ):
        super().__init__(lattice, list(flows.keys()), **kwargs)
        self.shifts: Dict[str, complex] = {name: complex(u) for name, u in flows.items()}
        self.z0 = complex(z0)
        self.gauge = gauge or QuadraticForm()

    def argument(self, points: np.ndarray, times: Times) -> np.ndarray:
        shift = self.z0 + sum(times.get(name, 0.0) * u for name, u in self.shifts.items())
        return points[:, 0] + shift

    def _evaluate(self, points: np.ndarray, times: Times) -> np.ndarray:
        return np.exp(self.gauge.value(times)) * self.lattice.sigma_derivatives(self.argument(points, times), 0)[0]

    def _analytic_partial(self, points: np.ndarray, times: Times, key: PartialKey) -> np.ndarray:
        sig = self.lattice.sigma_derivatives(self.argument(points, times), 2)
        base = {(): sig[0]}
        for flow in set(key):
            base[(flow,)] = self.shifts[flow] * sig[1]
        if len(key) == 2:
            base[key] = self.shifts[key[0]] * self.shifts[key[1]] * sig[2]
        return gauge_partials(self.gauge, times, key, base)

    def _analytic_gradient(self, points: np.ndarray, times: Times) -> np.ndarray:
        sig = self.lattice.sigma_derivatives(self.argument(points, times), 1)
        return (np.exp(self.gauge.value(times)) * sig[1])[:, None]

    def analytic_monodromy(self, generator: np.ndarray, times: Times):
        lam = complex(np.asarray(generator).ravel()[0])
        for omega, eta in ((self.lattice.omega1, self.lattice.eta1), (self.lattice.omega2, self.lattice.eta2)):
            if abs(lam - 2 * omega) < 1e-14 * self.scale:
                shift = self.argument(np.zeros((1, 1)), times)[0]
                return np.array([2 * eta]), complex(2 * eta * (shift + omega) + 1j * np.pi)
        return None


class EllipticPolynomialTau(_EllipticModel):
    """
    tau(z, t) = exp(Q(t)) prod_i sigma(z - x_i(t)).

    Flow partials are analytic through the trajectory velocities and
    accelerations, so they stay finite on the zero set.

    Args:
        lattice: Elliptic lattice
        trajectory: Source of the roots x_i(t)
        amplitude: Quadratic form giving log c(t)
        flow: Name of the flow variable
    """

    def __init__(
        self,
        lattice: EllipticLattice,
        trajectory: TrajectorySource,
        amplitude: Optional[QuadraticForm] = None,
        flow: str = "t",
        **kwargs,
    ):
        super().__init__(lattice, [flow], **kwargs)
        self.trajectory = trajectory
        self.amplitude = amplitude or QuadraticForm()
        self.flow = flow

    @property
    def count(self) -> int:
        return self.trajectory.count

    def roots(self, times: Times) -> np.ndarray:
        return self.trajectory.positions(times.get(self.flow, 0.0))

    def _factors(self, points: np.ndarray, times: Times, order: int) -> np.ndarray:
        """sigma^{(k)}(z - x_i) as an array (order + 1, n, N)."""
        y = points[:, 0][:, None] - self.roots(times)[None, :]
        return self.lattice.sigma_derivatives(y, order)

    def _evaluate(self, points: np.ndarray, times: Times) -> np.ndarray:
        factors = self._factors(points, times, 0)[0]
        return np.exp(self.amplitude.value(times)) * np.prod(factors, axis=1)

    def _analytic_partial(self, points: np.ndarray, times: Times, key: PartialKey) -> np.ndarray:
        t = times.get(self.flow, 0.0)
        v = self.trajectory.velocities(t)
        acc = self.trajectory.accelerations(t)
        sig = self._factors(points, times, 2)
        s0 = sig[0]
        s1 = -v[None, :] * sig[1]
        s2 = -acc[None, :] * sig[1] + (v * v)[None, :] * sig[2]

        count = s0.shape[1]
        product = np.prod(s0, axis=1)
        first = np.zeros(points.shape[0], dtype=complex)
        second = np.zeros(points.shape[0], dtype=complex)
        for i in range(count):
            others = np.prod(np.delete(s0, i, axis=1), axis=1)
            first += s1[:, i] * others
            second += s2[:, i] * others
            for j in range(count):
                if j != i:
                    rest = np.prod(np.delete(s0, [i, j], axis=1), axis=1)
                    second += s1[:, i] * s1[:, j] * rest

        base = {(): product, (self.flow,): first, (self.flow, self.flow): second}
        return gauge_partials(self.amplitude, times, key, base)

    def _analytic_gradient(self, points: np.ndarray, times: Times) -> np.ndarray:
        sig = self._factors(points, times, 1)
        count = sig.shape[2]
        grad = np.zeros(points.shape[0], dtype=complex)
        for i in range(count):
            grad += sig[1][:, i] * np.prod(np.delete(sig[0], i, axis=1), axis=1)
        return (np.exp(self.amplitude.value(times)) * grad)[:, None]

    def analytic_monodromy(self, generator: np.ndarray, times: Times):
        """a = 2 N eta, b = 2 eta (N omega - sum x_i) + N pi i for lam = 2 omega."""
        lam = complex(np.asarray(generator).ravel()[0])
        n = self.count
        for omega, eta in ((self.lattice.omega1, self.lattice.eta1), (self.lattice.omega2, self.lattice.eta2)):
            if abs(lam - 2 * omega) < 1e-14 * self.scale:
                total = np.sum(self.roots(times))
                return np.array([2 * n * eta]), complex(2 * eta * (n * omega - total) + 1j * np.pi * n)
        return None
