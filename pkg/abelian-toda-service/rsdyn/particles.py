"""
Ruijsenaars-Schneider particle system

State and equations of motion of the elliptic RS system
x_i'' = sum_{s != i} x_i' x_s' (V(x_i - x_s) - V(x_s - x_i)), V(x) = zeta(x) - zeta(x + kappa).
V is not odd, so both orderings of every pair are evaluated.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from exceptions import CollisionError
from special.weierstrass import EllipticLattice
from utils.numeric_utils import NumericUtils

logger = logging.getLogger(__name__)

COLLISION_GUARD = 1e-6
TAYLOR_POINTS = 48
TAYLOR_SHARE = 0.4


@dataclass
class ParticleState:
    """
    Positions and velocities of N particles on the elliptic curve.

    Args:
        x: Complex positions
        v: Complex velocities
        lattice: Period lattice of the potential
        kappa: Argument shift of the potential
    """

    x: np.ndarray
    v: np.ndarray
    lattice: EllipticLattice
    kappa: complex

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=complex))
        self.v = np.atleast_1d(np.asarray(self.v, dtype=complex))
        self.kappa = complex(self.kappa)
        if self.x.shape != self.v.shape:
            raise ValueError(f"Got {self.x.size} positions but {self.v.size} velocities")

    @property
    def N(self) -> int:
        return self.x.size

    def pack(self) -> np.ndarray:
        return np.concatenate([self.x, self.v])

    def with_vector(self, y: np.ndarray) -> "ParticleState":
        return ParticleState(y[: self.N], y[self.N:], self.lattice, self.kappa)

    def reversed(self) -> "ParticleState":
        """Same positions with velocities negated."""
        return ParticleState(self.x.copy(), -self.v, self.lattice, self.kappa)

    def velocity_sum(self) -> complex:
        return complex(np.sum(self.v))


def closest_approach(state: ParticleState) -> Tuple[Tuple[int, int], float]:
    """Smallest lattice distance of x_i - x_j and x_i - x_j +- kappa over ordered pairs."""
    worst, pair = np.inf, (0, 0)
    L = state.lattice
    for i in range(state.N):
        for j in range(state.N):
            if i == j:
                continue
            diff = state.x[i] - state.x[j]
            distance = float(np.min(L.distance_to_lattice(np.array([diff, diff + state.kappa, diff - state.kappa]))))
            if distance < worst:
                worst, pair = distance, (i, j)
    return pair, worst


def check_separation(state: ParticleState, guard: float = COLLISION_GUARD) -> None:
    """
    Raises:
        CollisionError: If some separation is below guard times the cell size
    """
    if state.N < 2:
        return
    pair, distance = closest_approach(state)
    if distance < guard * state.lattice.cell_size:
        logger.error(f"Collision guard violated by pair {pair}: separation {distance:.3e}")
        raise CollisionError(pair, distance)


def rs_potential(lattice: EllipticLattice, x, kappa: complex) -> np.ndarray:
    """V(x) = zeta(x) - zeta(x + kappa)."""
    x = np.asarray(x, dtype=complex)
    return lattice.zeta(x) - lattice.zeta(x + kappa)


def rs_rhs(state: ParticleState, coupling: float = 1.0) -> np.ndarray:
    """
    Accelerations of the RS system.

    Args:
        state: Current positions and velocities
        coupling: Factor multiplying the interaction; 1 is the RS system

    Returns:
        Complex array of N accelerations

    Raises:
        CollisionError: If the collision guard is violated
    """
    check_separation(state)
    n = state.N
    acc = np.zeros(n, dtype=complex)
    if n < 2:
        return acc
    i, j = np.where(~np.eye(n, dtype=bool))
    diff = state.x[i] - state.x[j]
    interaction = rs_potential(state.lattice, diff, state.kappa) - rs_potential(state.lattice, -diff, state.kappa)
    np.add.at(acc, i, state.v[i] * state.v[j] * interaction)
    return coupling * acc


def _interaction_taylor(lattice: EllipticLattice, diff: np.ndarray, kappa: complex, order: int) -> np.ndarray:
    """Taylor coefficients of V(d) - V(-d) about every d in diff, shape (order + 1, pairs)."""
    reach = np.min(
        np.stack([lattice.distance_to_lattice(diff + shift) for shift in (0.0, kappa, -kappa)]), axis=0
    )
    radius = TAYLOR_SHARE * reach
    samples = diff[:, None] + radius[:, None] * NumericUtils.circle_nodes(1.0, TAYLOR_POINTS)[None, :]
    values = rs_potential(lattice, samples, kappa) - rs_potential(lattice, -samples, kappa)
    return NumericUtils.taylor_coefficients(values, radius[:, None])[:, : order + 1].T


def rs_taylor(state: ParticleState, order: int, coupling: float = 1.0) -> np.ndarray:
    """
    Taylor coefficients of the RS trajectory through the given state.

    The acceleration series is built one order at a time from the position
    series found so far, so coefficient n + 2 follows from coefficients up to n + 1.

    Args:
        state: Positions and velocities at the expansion point
        order: Highest power of (t - t0)
        coupling: Factor multiplying the interaction

    Returns:
        Complex array (order + 1, N); row n holds x^(n)(t0) / n!

    Raises:
        CollisionError: If the collision guard is violated
    """
    check_separation(state)
    n = state.N
    X = np.zeros((order + 1, n), dtype=complex)
    X[0] = state.x
    if order >= 1:
        X[1] = state.v
    if n < 2 or order < 2:
        return X
    i, j = np.where(~np.eye(n, dtype=bool))
    kernel = _interaction_taylor(state.lattice, state.x[i] - state.x[j], state.kappa, order - 2)
    for k in range(order - 1):
        velocity = np.arange(1, k + 2)[:, None] * X[1 : k + 2]
        delta = X[: k + 1, i] - X[: k + 1, j]
        delta[0] = 0.0
        interaction = NumericUtils.series_compose(kernel[: k + 1], delta)
        pair_terms = NumericUtils.series_product(velocity[:, i], velocity[:, j])
        term = NumericUtils.series_product(pair_terms, interaction)[k]
        acc = np.zeros(n, dtype=complex)
        np.add.at(acc, i, term)
        X[k + 2] = coupling * acc / ((k + 1) * (k + 2))
    return X
