"""
Riemann theta functions

Multidimensional theta series with half-integer characteristics, term-wise
directional derivatives and the level-two Kummer map. Every evaluation is a
truncated lattice sum centred at the integer point nearest the stationary
point of the Gaussian factor, with the truncation ellipsoid derived from the
smallest eigenvalue of Im B.
"""

import itertools
import logging
import math
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from exceptions import BasePointError, PrecisionUnreachableError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-14
DEFAULT_RADIUS_CAP = 60.0

ArrayLike = Union[complex, Sequence[complex], np.ndarray]


class RiemannMatrix:
    """
    Symmetric g x g complex matrix with positive-definite imaginary part.

    The matrix is validated at construction and treated as immutable
    afterwards; derived quantities (inverse of Im B, smallest eigenvalue)
    are computed once.
    """

    def __init__(self, entries: ArrayLike):
        matrix = np.array(entries, dtype=complex, ndmin=2)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"Riemann matrix must be square, got shape {matrix.shape}")
        if not np.array_equal(matrix, matrix.T):
            raise ValueError("Riemann matrix must be symmetric as stored")

        eigenvalues = linalg.eigvalsh(matrix.imag)
        if eigenvalues[0] <= 0:
            raise ValueError(f"Im B is not positive definite (smallest eigenvalue {eigenvalues[0]:.3e})")

        matrix.setflags(write=False)
        self._entries = matrix
        self._lambda_min = float(eigenvalues[0])
        self._y_inverse = linalg.inv(matrix.imag)
        self._y_inverse.setflags(write=False)

    @classmethod
    def from_pairs(cls, rows: Sequence[Sequence[Sequence[float]]]) -> "RiemannMatrix":
        """Build from nested [re, im] pairs as stored in config files."""
        return cls([[complex(re, im) for re, im in row] for row in rows])

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def g(self) -> int:
        return self._entries.shape[0]

    @property
    def lambda_min(self) -> float:
        return self._lambda_min

    @property
    def y_inverse(self) -> np.ndarray:
        return self._y_inverse

    def scaled(self, factor: float) -> "RiemannMatrix":
        return RiemannMatrix(self._entries * factor)

    def column(self, j: int) -> np.ndarray:
        return np.array(self._entries[:, j])

    def __repr__(self) -> str:
        return f"RiemannMatrix(g={self.g}, entries={self._entries.tolist()})"


class Characteristic:
    """Half-integer characteristic [eps, delta] with components reduced to {0, 1/2}."""

    def __init__(self, eps: Sequence[float], delta: Sequence[float]):
        eps_arr = np.atleast_1d(np.asarray(eps, dtype=float))
        delta_arr = np.atleast_1d(np.asarray(delta, dtype=float))
        if eps_arr.shape != delta_arr.shape:
            raise ValueError("Characteristic halves must have equal length")
        for name, values in (("eps", eps_arr), ("delta", delta_arr)):
            doubled = 2.0 * values
            if not np.allclose(doubled, np.round(doubled), atol=1e-12):
                raise ValueError(f"Characteristic {name} must be half-integer, got {values.tolist()}")
        self.eps = np.mod(np.round(2.0 * eps_arr), 2) / 2.0
        self.delta = np.mod(np.round(2.0 * delta_arr), 2) / 2.0

    @property
    def g(self) -> int:
        return self.eps.shape[0]

    def is_odd(self) -> bool:
        return int(round(4.0 * float(self.eps @ self.delta))) % 2 == 1

    def __repr__(self) -> str:
        return f"Characteristic(eps={self.eps.tolist()}, delta={self.delta.tolist()})"


def as_points(z: ArrayLike, g: int) -> Tuple[np.ndarray, bool]:
    """
    Normalize an argument to an (n, g) complex array.

    Returns the array and whether the caller passed a single point.
    For g = 1 a flat array is read as a batch of scalar points.
    """
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 0:
        return arr.reshape(1, 1) if g == 1 else _bad_shape(arr, g), True
    if arr.ndim == 1:
        if arr.shape[0] == g:
            return arr.reshape(1, g), True
        if g == 1:
            return arr.reshape(-1, 1), False
        return _bad_shape(arr, g), False
    if arr.shape[-1] != g:
        return _bad_shape(arr, g), False
    return arr.reshape(-1, g), False


def _bad_shape(arr: np.ndarray, g: int) -> np.ndarray:
    raise ValueError(f"Argument of shape {arr.shape} does not match genus {g}")


def _directions(derivatives: Iterable[ArrayLike], g: int) -> List[np.ndarray]:
    result = []
    for direction in derivatives:
        vec = np.atleast_1d(np.asarray(direction, dtype=complex))
        if vec.shape != (g,):
            raise ValueError(f"Derivative direction {vec.tolist()} does not match genus {g}")
        result.append(vec)
    return result


@lru_cache(maxsize=256)
def _ball_offsets(g: int, radius: float) -> np.ndarray:
    """Integer vectors k with |k| <= radius, as a read-only (P, g) float array."""
    reach = int(math.ceil(radius))
    axis = np.arange(-reach, reach + 1)
    grid = np.array(list(itertools.product(axis, repeat=g)), dtype=float)
    offsets = grid[np.einsum("pi,pi->p", grid, grid) <= radius * radius]
    offsets.setflags(write=False)
    return offsets


def truncation_radius(
    B: RiemannMatrix,
    tolerance: float,
    directions: Sequence[np.ndarray] = (),
    reach: float = 0.0,
    radius_cap: float = DEFAULT_RADIUS_CAP,
) -> float:
    """
    Radius of the summation ball around the centre for the requested tail bound.

    Derivative factors grow polynomially in |n|, so each requested direction
    enlarges the ball by the logarithm of its largest factor inside it.
    """
    g = B.g
    base = math.log(1.0 / tolerance) + 2.0 + g
    radius = math.sqrt(base / (math.pi * B.lambda_min))
    if directions:
        norms = [float(np.linalg.norm(v)) for v in directions]
        for _ in range(2):
            growth = sum(
                math.log(max(math.e, 2.0 * math.pi * norm * (reach + radius + math.sqrt(g)))) for norm in norms
            )
            radius = math.sqrt((base + growth) / (math.pi * B.lambda_min))
    radius += 0.5 * math.sqrt(g) + 0.5
    if radius > radius_cap:
        raise PrecisionUnreachableError(radius, radius_cap)
    return radius


def theta_series(
    z: ArrayLike,
    B: RiemannMatrix,
    eps: Optional[np.ndarray] = None,
    derivatives: Iterable[ArrayLike] = (),
    tolerance: float = DEFAULT_TOLERANCE,
    radius_cap: float = DEFAULT_RADIUS_CAP,
) -> Union[complex, np.ndarray]:
    """
    Evaluate sum_m exp(pi i (n, B n) + 2 pi i (n, z)) with n = m + eps.

    Each derivative direction V multiplies the term by 2 pi i (V, n).
    """
    g = B.g
    points, single = as_points(z, g)
    shift = np.zeros(g) if eps is None else np.asarray(eps, dtype=float)
    dirs = _directions(derivatives, g)

    stationary = -(points.imag @ B.y_inverse.T)
    reach = float(np.max(np.linalg.norm(stationary, axis=1))) if dirs else 0.0
    radius = truncation_radius(B, tolerance, dirs, reach, radius_cap)
    offsets = _ball_offsets(g, round(radius, 6))
    logger.debug(f"Theta sum: g={g}, radius={radius:.3f}, terms={offsets.shape[0]}, points={points.shape[0]}")

    centres = np.round(stationary - shift)
    n = centres[:, None, :] + offsets[None, :, :] + shift
    quadratic = np.einsum("npi,ij,npj->np", n, B.entries, n)
    linear = np.einsum("npi,ni->np", n, points)
    exponent = 1j * np.pi * quadratic + 2j * np.pi * linear
    peak = exponent.real.max(axis=1, keepdims=True)
    terms = np.exp(exponent - peak)
    for vec in dirs:
        terms = terms * (2j * np.pi * (n @ vec))
    values = np.exp(peak[:, 0]) * terms.sum(axis=1)
    return complex(values[0]) if single else values


def riemann_theta(
    z: ArrayLike,
    B: RiemannMatrix,
    derivatives: Iterable[ArrayLike] = (),
    tolerance: float = DEFAULT_TOLERANCE,
    radius_cap: float = DEFAULT_RADIUS_CAP,
) -> Union[complex, np.ndarray]:
    """
    Riemann theta function theta(z | B) and its directional derivatives.

    Args:
        z: Point (g,) or batch (n, g); for g = 1 a flat array is a batch
        B: Riemann matrix
        derivatives: Directions V_1..V_p, each applied term-wise
        tolerance: Tail bound relative to the leading term
        radius_cap: Largest admissible truncation radius

    Returns:
        Complex value for a single point, array for a batch

    Raises:
        PrecisionUnreachableError: If the truncation radius exceeds the cap
    """
    return theta_series(z, B, None, derivatives, tolerance, radius_cap)


def theta_char(
    characteristic: Characteristic,
    z: ArrayLike,
    B: RiemannMatrix,
    derivatives: Iterable[ArrayLike] = (),
    tolerance: float = DEFAULT_TOLERANCE,
    radius_cap: float = DEFAULT_RADIUS_CAP,
) -> Union[complex, np.ndarray]:
    """Theta function with characteristic [eps, delta], derivatives term-wise."""
    if characteristic.g != B.g:
        raise ValueError(f"Characteristic genus {characteristic.g} does not match B genus {B.g}")
    points, single = as_points(z, B.g)
    shifted = points + characteristic.delta
    values = theta_series(shifted, B, characteristic.eps, derivatives, tolerance, radius_cap)
    return complex(values[0]) if single else values


def half_characteristics(g: int) -> List[np.ndarray]:
    """All eps in {0, 1/2}^g in lexicographic order."""
    return [np.array(eps, dtype=float) for eps in itertools.product((0.0, 0.5), repeat=g)]


def kummer_coordinates(
    Z: ArrayLike,
    B: RiemannMatrix,
    direction: Optional[ArrayLike] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    derivatives: Sequence[ArrayLike] = (),
) -> np.ndarray:
    """
    Unnormalized level-two theta vector theta[eps, 0](2Z | 2B).

    With a direction V the V-derivative of Z -> K(Z) is returned instead,
    which is 2 d_V theta[eps, 0](w | 2B) at w = 2Z. Several directions may be
    passed as derivatives for higher derivatives of the map.
    """
    point = np.atleast_1d(np.asarray(Z, dtype=complex))
    doubled = B.scaled(2.0)
    derivatives = list(derivatives) + ([] if direction is None else [direction])
    derivatives = [np.atleast_1d(np.asarray(vec, dtype=complex)) for vec in derivatives]
    factor = 2.0 ** len(derivatives)
    return np.array(
        [
            factor * complex(theta_series(2.0 * point, doubled, eps, derivatives, tolerance))
            for eps in half_characteristics(B.g)
        ]
    )


def kummer_map(Z: ArrayLike, B: RiemannMatrix, tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """
    Projective image of Z under the Kummer map, largest component scaled to 1.

    Raises:
        BasePointError: If every component is below 1e-13
    """
    coords = kummer_coordinates(Z, B, tolerance=tolerance)
    magnitudes = np.abs(coords)
    if magnitudes.max() < 1e-13:
        raise BasePointError(f"Point {np.atleast_1d(Z).tolist()} is a base point of the Kummer map")
    return coords / coords[int(np.argmax(magnitudes))]
