"""
Independent reference evaluations used to validate the special functions.

These are deliberately naive: a fixed-box theta sum, Lambert-series
zeta/eta1 and symmetric lattice products for sigma. They share no code path
with the production evaluators beyond numpy.
"""

import itertools
import math
from typing import Iterable, Optional, Sequence

import numpy as np


def brute_force_theta(
    z: Sequence[complex],
    B: np.ndarray,
    eps: Optional[Sequence[float]] = None,
    delta: Optional[Sequence[float]] = None,
    derivatives: Iterable[Sequence[complex]] = (),
    radius: int = 30,
) -> complex:
    """Direct sum over the box |m_i| <= radius of theta[eps, delta](z | B)."""
    B = np.asarray(B, dtype=complex)
    g = B.shape[0]
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    eps = np.zeros(g) if eps is None else np.asarray(eps, dtype=float)
    delta = np.zeros(g) if delta is None else np.asarray(delta, dtype=float)

    axis = np.arange(-radius, radius + 1, dtype=float)
    total = 0.0 + 0.0j
    if g == 1:
        rest = np.zeros((1, 0))
    else:
        rest = np.array(list(itertools.product(axis, repeat=g - 1)), dtype=float)
    # chunk over the first coordinate to bound memory at g = 3
    for first in axis:
        m =np.column_stack([np.full(rest.shape[0], first), rest]) + eps
        exponent = 1j * math.pi * np.einsum("pi,ij,pj->p", m, B, m) + 2j * math.pi * (m @ (z + delta))
        terms = np.exp(exponent)
        for direction in derivatives:
            terms = terms * (2j * math.pi * (m @ np.atleast_1d(np.asarray(direction, dtype=complex))))
        total += terms.sum()
    return complex(total)


def lambert_eta1(omega1: complex, omega2: complex, terms: int = 200) -> complex:
    """eta1 from the q-expansion of the weight-two Eisenstein series."""
    q2 = np.exp(2j * math.pi * omega2 / omega1)
    n = np.arange(1, terms + 1)
    series = np.sum(n * q2**n / (1 - q2**n))
    return complex(math.pi**2 / (12 * omega1) * (1 - 24 * series))


def lambert_zeta(z: complex, omega1: complex, omega2: complex, terms: int = 200) -> complex:
    """Weierstrass zeta from the cotangent plus Lambert sine series."""
    q2 = np.exp(2j * math.pi * omega2 / omega1)
    v = math.pi * z / (2 * omega1)
    n = np.arange(1, terms + 1)
    series = np.sum(q2**n / (1 - q2**n) * np.sin(2 * n * v))
    eta1 = lambert_eta1(omega1, omega2, terms)
    return complex(eta1 * z / omega1 + math.pi / (2 * omega1) * (np.cos(v) / np.sin(v) + 4 * series))


def _lattice_points(omega1: complex, omega2: complex, size: int) -> np.ndarray:
    axis = np.arange(-size, size + 1)
    a, b = np.meshgrid(axis, axis, indexing="ij")
    points = (2 * a * omega1 + 2 * b * omega2).ravel()
    return points[points != 0]


def lattice_product_sigma(z: complex, omega1: complex, omega2: complex, size: int = 200) -> complex:
    """Symmetrically truncated Weierstrass product; accurate to roughly 1e-5."""
    w = _lattice_points(omega1, omega2, size)
    ratio = z / w
    log_terms = np.log1p(-ratio) + ratio + 0.5 * ratio * ratio
    return complex(z * np.exp(np.sum(log_terms)))


def lattice_sum_zeta(z: complex, omega1: complex, omega2: complex, size: int = 200) -> complex:
    """Symmetrically truncated Eisenstein-type sum for zeta; accurate to roughly 1e-5."""
    w = _lattice_points(omega1, omega2, size)
    return complex(1 / z + np.sum(1 / (z - w) + 1 / w + z / (w * w)))
