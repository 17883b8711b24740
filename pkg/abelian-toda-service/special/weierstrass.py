"""
Weierstrass sigma, zeta and wp functions

The lattice is generated by 2*omega1 and 2*omega2. Sigma is evaluated through
the odd Jacobi theta function,

    sigma(z) = (2 omega1 / (pi theta1'(0))) exp(eta1 z^2 / (2 omega1)) theta1(pi z / (2 omega1)),

with theta1(v) = -theta[1/2, 1/2](v / pi | tau) and tau = omega2 / omega1, so
the series converges geometrically. The quasi-periods eta1 and eta2 are
computed independently and tied together by the Legendre relation.
"""

import logging
import math
from typing import Tuple, Union

import numpy as np

from exceptions import PoleError, QuasiPeriodError
from special.theta import Characteristic, RiemannMatrix, theta_char

logger = logging.getLogger(__name__)

POLE_DISTANCE = 1e-12
LEGENDRE_TOLERANCE = 1e-12

_ODD = Characteristic([0.5], [0.5])


class EllipticLattice:
    """
    Period lattice 2*omega1 Z + 2*omega2 Z with cached quasi-periods.

    Args:
        omega1: First half-period
        omega2: Second half-period, Im(omega2 / omega1) > 0

    Raises:
        ValueError: If the half-periods are not positively oriented
        QuasiPeriodError: If eta1 and eta2 violate the Legendre relation
    """

    def __init__(self, omega1: complex, omega2: complex):
        omega1 = complex(omega1)
        omega2 = complex(omega2)
        if omega1 == 0:
            raise ValueError("Half-period omega1 must be nonzero")
        tau = omega2 / omega1
        if tau.imag <= 0:
            raise ValueError(f"Im(omega2/omega1) must be positive, got tau={tau}")

        self.omega1 = omega1
        self.omega2 = omega2
        self.tau = tau
        self._matrix = RiemannMatrix([[tau]])
        self._scale = math.pi / (2.0 * omega1)

        theta1_prime_0 = self._theta1(np.zeros(1), 1)[0]
        theta1_third_0 = self._theta1(np.zeros(1), 3)[0]
        self._theta1_prime_0 = theta1_prime_0
        self.eta1 = complex(-(math.pi**2) * theta1_third_0 / (12.0 * omega1 * theta1_prime_0))
        self._gauss = self.eta1 / (2.0 * omega1)
        self._amplitude = 2.0 * omega1 / (math.pi * theta1_prime_0)
        self.eta2 = complex(self._zeta_unchecked(np.array([omega2]))[0])
        logger.debug(
            f"EllipticLattice tau={tau:.6g}: eta1={self.eta1:.12g}, eta2={self.eta2:.12g}, "
            f"Legendre residual={self.legendre_residual:.2e}"
        )
        if self.legendre_residual > LEGENDRE_TOLERANCE:
            raise QuasiPeriodError(self.legendre_residual, tau)

    @property
    def legendre_residual(self) -> float:
        return abs(self.eta1 * self.omega2 - self.eta2 * self.omega1 - 0.5j * math.pi)

    @property
    def generators(self) -> Tuple[complex, complex]:
        return 2.0 * self.omega1, 2.0 * self.omega2

    @property
    def cell_size(self) -> float:
        return min(abs(2.0 * self.omega1), abs(2.0 * self.omega2))

    @property
    def diameter(self) -> float:
        return abs(2.0 * self.omega1) + abs(2.0 * self.omega2)

    def _theta1(self, v: np.ndarray, order: int) -> np.ndarray:
        """theta1^{(order)}(v) = -pi^{-order} theta[1/2,1/2]^{(order)}(v / pi)."""
        values = theta_char(_ODD, np.asarray(v, dtype=complex) / math.pi, self._matrix, [[1.0]] * order)
        return -np.atleast_1d(values) / math.pi**order

    def coordinates(self, z: Union[complex, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        """Real coordinates (s, r) with z = 2 s omega1 + 2 r omega2."""
        z = np.asarray(z, dtype=complex)
        basis = np.array([[2 * self.omega1.real, 2 * self.omega2.real], [2 * self.omega1.imag, 2 * self.omega2.imag]])
        coords = np.linalg.solve(basis, np.stack([z.real.ravel(), z.imag.ravel()]))
        return coords[0].reshape(z.shape), coords[1].reshape(z.shape)

    def lattice_point(self, a: int, b: int) -> complex:
        return 2 * a * self.omega1 + 2 * b * self.omega2

    def reduce(self, z: Union[complex, np.ndarray]) -> np.ndarray:
        """Representative of z in the fundamental parallelogram [0, 1)^2."""
        s, r = self.coordinates(z)
        return np.asarray(z) - 2 * np.floor(s) * self.omega1 - 2 * np.floor(r) * self.omega2

    def centered(self, z: Union[complex, np.ndarray]) -> np.ndarray:
        """z minus its nearest lattice point."""
        z = np.asarray(z, dtype=complex)
        s, r = self.coordinates(z)
        best = z.copy()
        for ds in (-1, 0, 1):
            for dr in (-1, 0, 1):
                candidate = z - 2 * (np.round(s) + ds) * self.omega1 - 2 * (np.round(r) + dr) * self.omega2
                best = np.where(np.abs(candidate) < np.abs(best), candidate, best)
        return best

    def distance_to_lattice(self, z: Union[complex, np.ndarray]) -> np.ndarray:
        """Distance from z to the nearest lattice point."""
        return np.abs(self.centered(z))

    def sigma_derivatives(self, z: Union[complex, np.ndarray], order: int = 2) -> np.ndarray:
        """
        Sigma and its z-derivatives up to the given order (at most 2).

        Returns:
            Array of shape (order + 1, *z.shape)
        """
        if order > 2:
            raise ValueError(f"Sigma derivatives are available up to order 2, got {order}")
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        v = self._scale * flat
        b = self._scale
        a = self._gauss
        gauss = self._amplitude * np.exp(a * flat * flat)
        t0 = self._theta1(v, 0)
        out = [gauss * t0]
        if order >= 1:
            t1 = self._theta1(v, 1)
            out.append(gauss * (2 * a * flat * t0 + b * t1))
        if order >= 2:
            t2 = self._theta1(v, 2)
            out.append(gauss * ((2 * a + 4 * a * a * flat * flat) * t0 + 4 * a * b * flat * t1 + b * b * t2))
        result = np.array(out)
        on_lattice = self.distance_to_lattice(flat) == 0.0
        result[0, on_lattice] = 0.0
        return result.reshape((order + 1,) + z.shape)

    def sigma(self, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        values = self.sigma_derivatives(z, 0)[0]
        return complex(values) if np.ndim(z) == 0 else values

    def _zeta_unchecked(self, z: np.ndarray) -> np.ndarray:
        v = self._scale * z
        return 2 * self._gauss * z + self._scale * self._theta1(v, 1) / self._theta1(v, 0)

    def zeta(self, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        """
        Weierstrass zeta = sigma'/sigma.

        Raises:
            PoleError: If z lies within 1e-12 of a lattice point
        """
        arr = np.asarray(z, dtype=complex)
        flat = arr.ravel()
        self._check_poles(flat)
        values = self._zeta_unchecked(flat).reshape(arr.shape)
        return complex(values) if arr.ndim == 0 else values

    def wp(self, z: Union[complex, np.ndarray]) -> Union[complex, np.ndarray]:
        """Weierstrass wp = zeta^2 - sigma''/sigma."""
        arr = np.asarray(z, dtype=complex)
        flat = arr.ravel()
        self._check_poles(flat)
        sig = self.sigma_derivatives(flat, 2)
        zeta = sig[1] / sig[0]
        values = (zeta * zeta - sig[2] / sig[0]).reshape(arr.shape)
        return complex(values) if arr.ndim == 0 else values

    def _check_poles(self, flat: np.ndarray) -> None:
        distance = self.distance_to_lattice(flat)
        if flat.size and distance.min() < POLE_DISTANCE:
            worst = int(np.argmin(distance))
            raise PoleError(complex(flat[worst]), float(distance[worst]))

    def quasi_period_factor(self, z: Union[complex, np.ndarray], a: int, b: int) -> np.ndarray:
        """
        Multiplier of sigma under the shift by 2 a omega1 + 2 b omega2.

        sigma(z + lam) = (-1)^(a+b+ab) exp(2 (a eta1 + b eta2)(z + lam/2)) sigma(z)
        """
        lam = self.lattice_point(a, b)
        sign = -1.0 if (a + b + a * b) % 2 else 1.0
        return sign * np.exp(2 * (a * self.eta1 + b * self.eta2) * (np.asarray(z) + lam / 2))

    def __repr__(self) -> str:
        return f"EllipticLattice(omega1={self.omega1}, omega2={self.omega2})"


def weierstrass(z: complex, lattice: EllipticLattice) -> Tuple[complex, complex]:
    """
    Weierstrass sigma and zeta at a single point.

    Raises:
        PoleError: If z lies within 1e-12 of a lattice point (zeta undefined)
    """
    return lattice.sigma(z), lattice.zeta(z)
