"""
Exact genus-one wave functions

Baker-Akhiezer functions built from the Weierstrass sigma function for the
free-particle tau sigma(z - x0 - v t) (continuous flow) and for
sigma(z + z0 + nu V) (discrete flow). Their expansion coefficients xi_s in
the inverse spectral parameter are extracted by trapezoidal contour
integrals around A = 0, where A is the point on the curve.

BlochLayers evaluates the 2 omega1-periodic functions
f_j(y) = d^j/dA^j [sigma(y + A) exp(-c A y) / sigma(y)] at A = 0, c = eta1/omega1,
that span the wave coefficients of elliptic tau functions.
"""

import logging
import math
from typing import Optional

import numpy as np

from special.weierstrass import EllipticLattice
from taumodels.elliptic_tau import SigmaTau
from utils.numeric_utils import NumericUtils

logger = logging.getLogger(__name__)

DEFAULT_CONTOUR_POINTS = 64
LOG_BRANCH_LIMIT = 0.9
TAYLOR_POINTS = 48
TAYLOR_SHARE = 0.4


def _flat(z) -> np.ndarray:
    return np.asarray(z, dtype=complex).reshape(-1)


class BlochLayers:
    """
    Values and y-derivatives of f_0 = 1, f_1 = zeta(y) - c y, ..., f_order.

    Args:
        lattice: Elliptic lattice
        order: Highest layer
        radius: Radius of the A-circle used for the Taylor coefficients
        count: Number of nodes on the circle
    """

    def __init__(self, lattice: EllipticLattice, order: int, radius: Optional[float] = None,
                 count: int = DEFAULT_CONTOUR_POINTS):
        if order + 1 > count // 2:
            raise ValueError(f"Layer order {order} needs more than {count} contour points")
        self.lattice = lattice
        self.order = int(order)
        self.c = lattice.eta1 / lattice.omega1
        self.radius = radius or 0.5 * lattice.cell_size
        self.nodes = NumericUtils.circle_nodes(self.radius, count)
        self._factorials = np.array([math.factorial(j) for j in range(self.order + 1)], dtype=float)

    def _coefficients(self, y: np.ndarray):
        A = self.nodes[None, :]
        moved = y[:, None] + A
        sig = self.lattice.sigma_derivatives(moved, 1)
        gauss = np.exp(-self.c * A * y[:, None])
        g = NumericUtils.taylor_coefficients(sig[0] * gauss, self.radius)[:, : self.order + 1]
        g_y = NumericUtils.taylor_coefficients((sig[1] - self.c * A * sig[0]) * gauss, self.radius)[:, : self.order + 1]
        return g * self._factorials, g_y * self._factorials

    def values(self, y) -> np.ndarray:
        """Array (order + 1, n) of f_j(y)."""
        y = _flat(y)
        g, _ = self._coefficients(y)
        return (g / self.lattice.sigma_derivatives(y, 0)[0][:, None]).T

    def values_and_derivatives(self, y):
        """Pair of arrays (order + 1, n): f_j(y) and f_j'(y)."""
        y = _flat(y)
        g, g_y = self._coefficients(y)
        sig = self.lattice.sigma_derivatives(y, 1)
        f = g / sig[0][:, None]
        f_y = g_y / sig[0][:, None] - f * (sig[1] / sig[0])[:, None]
        return f.T, f_y.T

    def taylor(self, y, order: int, count: int = TAYLOR_POINTS) -> np.ndarray:
        """
        Taylor coefficients of every f_j about every y, array (self.order + 1, order + 1, n).

        Each expansion samples a circle reaching TAYLOR_SHARE of the way to the nearest pole.
        """
        y = _flat(y)
        if order >= count // 2:
            raise ValueError(f"Taylor order {order} needs more than {count} circle points")
        radius = TAYLOR_SHARE * self.lattice.distance_to_lattice(y)
        circle = y[:, None] + radius[:, None] * NumericUtils.circle_nodes(1.0, count)[None, :]
        samples = self.values(circle).reshape(self.order + 1, y.size, count)
        coefficients = NumericUtils.taylor_coefficients(samples, radius[:, None])[..., : order + 1]
        return np.moveaxis(coefficients, 2, 1)

    def pole_weights(self) -> np.ndarray:
        """Residue of f_j at y = 0, i.e. sigma^(j)(0)."""
        coefficients = NumericUtils.taylor_coefficients(self.lattice.sigma(self.nodes), self.radius)
        return coefficients[: self.order + 1] * self._factorials


class ContinuousEllipticWave:
    """
    Normalized wave function of tau = sigma(z - x0 - v t) for the shift U.

    psi = exp((k + b) t) k^(z/U) (1 + sum_s xi_s k^-s); the expansion
    coefficients are periodic under 2 omega1 and b = -v c U.

    Args:
        lattice: Elliptic lattice
        U: Shift of the difference equation
        x0: Position of the zero at t = 0
        v: Its velocity
        radius: Radius of the A-contour (below |U|)
        count: Contour nodes
    """

    def __init__(self, lattice: EllipticLattice, U: complex, x0: complex, v: complex,
                 radius: Optional[float] = None, count: int = DEFAULT_CONTOUR_POINTS):
        self.lattice = lattice
        self.U = complex(U)
        self.x0 = complex(x0)
        self.v = complex(v)
        self.c = lattice.eta1 / lattice.omega1
        self.b = -self.v * self.c * self.U
        self.radius = radius or 0.5 * min(abs(self.U), lattice.cell_size)
        if self.radius >= abs(self.U):
            raise ValueError(f"Contour radius {self.radius:.3g} must stay below |U| = {abs(self.U):.3g}")
        self.nodes = NumericUtils.circle_nodes(self.radius, count)
        A = self.nodes
        zeta = lattice.zeta
        self._k = -self.v * lattice.sigma(A - self.U) / (lattice.sigma(A) * lattice.sigma(self.U)) * np.exp(
            self.c * A * self.U
        )
        self._energy = self.v * (zeta(A) - zeta(self.U))
        self._weight = (zeta(A) - zeta(A - self.U) - self.c * self.U) * A / count
        logger.debug(f"Continuous elliptic wave: U={self.U:.4g}, v={self.v:.4g}, contour radius {self.radius:.3g}")

    def tau_model(self) -> SigmaTau:
        return SigmaTau(self.lattice, {"t": -self.v}, -self.x0)

    def positions(self, t: float) -> np.ndarray:
        return np.array([self.x0 + self.v * t])

    def potential(self, z, t: float) -> np.ndarray:
        """u(z, t) = d/dt log tau(z) - d/dt log tau(z + U)."""
        y = _flat(z) - self.x0 - self.v * t
        return self.v * (self.lattice.zeta(y + self.U) - self.lattice.zeta(y))

    def _phi(self, z, t: float):
        """Normalized wave and its t-derivative at every contour node, shape (n, M)."""
        A = self.nodes[None, :]
        y = (_flat(z) - self.x0 - self.v * t)[:, None]
        moved = self.lattice.sigma_derivatives(y + A, 1)
        sig = self.lattice.sigma_derivatives(y, 1)
        gauss = np.exp(-self.c * A * y)
        F = moved[0] * gauss / sig[0]
        F_y = (moved[1] - self.c * A * moved[0]) * gauss / sig[0] - F * sig[1] / sig[0]
        rate = self._energy - self._k - self.b
        envelope = np.exp(-self.c * A * (self.x0 + self.v * t) + rate[None, :] * t)
        phi = F * envelope
        phi_dot = (-self.v * F_y + F * (-self.c * A * self.v + rate[None, :])) * envelope
        return phi, phi_dot

    def xi(self, s: int, z, t: float) -> np.ndarray:
        """xi_s at the points z (any shape, returned flat)."""
        phi, _ = self._phi(z, t)
        return phi @ (self._k**s * self._weight)

    def xi_stack(self, depth: int, z, t: float) -> np.ndarray:
        """Array (depth + 1, n) of xi_0 .. xi_depth."""
        phi, _ = self._phi(z, t)
        return (phi @ (self._k[:, None] ** np.arange(depth + 1) * self._weight[:, None])).T

    def xi_dot(self, s: int, z, t: float) -> np.ndarray:
        _, phi_dot = self._phi(z, t)
        return phi_dot @ (self._k**s * self._weight)


class DiscreteEllipticWave:
    """
    Normalized wave function of tau(z, nu) = sigma(z + z0 + nu V) for the shift W.

    psi = k^nu (1 + sum_s xi_s k^-s) with
    1 + sum_s xi_s k^-s = sigma(Y + A) / sigma(Y) exp(p z), Y = z + z0 + nu V,
    where p W and log k are the exact discrete secancy constants at A.

    Args:
        lattice: Elliptic lattice
        V: Shift per unit of nu
        W: Shift of the difference equation
        z0: Base shift
        radius: Radius of the A-contour
        count: Contour nodes

    Raises:
        ValueError: If the logarithm of the pW ratio leaves its principal branch on the contour
    """

    def __init__(self, lattice: EllipticLattice, V: complex, W: complex, z0: complex = 0.0,
                 radius: Optional[float] = None, count: int = DEFAULT_CONTOUR_POINTS):
        self.lattice = lattice
        self.V = complex(V)
        self.W = complex(W)
        self.z0 = complex(z0)
        reach = min(abs(self.V - self.W), abs(self.V + self.W), lattice.cell_size)
        self.radius = radius or 0.4 * reach
        self.nodes = NumericUtils.circle_nodes(self.radius, count)
        A = self.nodes
        s, zeta = lattice.sigma, lattice.zeta
        c1 = s(W + V) * s(W - V + A)
        alpha = -s(V + W - A) * s(V - W) / c1
        beta = s(2 * W) * s(A) / c1
        if np.max(np.abs(alpha - 1)) > LOG_BRANCH_LIMIT:
            raise ValueError(
                f"|alpha - 1| reaches {np.max(np.abs(alpha - 1)):.3f} on the contour; reduce the radius"
            )
        log_sqrt_alpha = 0.5 * np.log(alpha)
        self._p = log_sqrt_alpha / self.W
        self._k = np.exp(log_sqrt_alpha) / beta
        self._weight = (zeta(A) - 0.5 * zeta(W - V + A) + 0.5 * zeta(V + W - A)) * A / count
        logger.debug(f"Discrete elliptic wave: V={self.V:.4g}, W={self.W:.4g}, contour radius {self.radius:.3g}")

    def tau_model(self) -> SigmaTau:
        return SigmaTau(self.lattice, {"nu": self.V}, self.z0)

    def _phi(self, z, nu) -> np.ndarray:
        A = self.nodes[None, :]
        z = _flat(z)[:, None]
        Y = z + self.z0 + nu * self.V
        return self.lattice.sigma(Y + A) / self.lattice.sigma(Y) * np.exp(self._p[None, :] * z)

    def xi(self, s: int, z, nu) -> np.ndarray:
        """xi_s at the points z (any shape, returned flat) and level nu."""
        return self._phi(z, nu) @ (self._k**s * self._weight)

    def xi_stack(self, depth: int, z, nu) -> np.ndarray:
        """
        Array (depth + 1, n) of xi_0 .. xi_depth.

        nu may be a scalar or hold one level per point.
        """
        z = _flat(z)
        nu = np.broadcast_to(np.asarray(nu, dtype=complex), z.shape)[:, None]
        weights = self._k[:, None] ** np.arange(depth + 1) * self._weight[:, None]
        return (self._phi(z, nu) @ weights).T

    def potential(self, z, nu) -> np.ndarray:
        """u at (z, nu) read off the wave: xi_1(z - W, nu + 1) - xi_1(z + W, nu + 1)."""
        z = _flat(z)
        level = np.asarray(nu, dtype=complex) + 1
        return self.xi_stack(1, z - self.W, level)[1] - self.xi_stack(1, z + self.W, level)[1]
