"""
Dressing of wave functions.

A normalized wave psi_n = k^n phi_n with phi_n = sum_s phi_s(n) k^-s is
written as psi = Phi k^n for the wave operator Phi = sum_s phi_s(n) T^-s;
L = Phi T Phi^-1 is the unique pseudo-difference operator with L psi = k psi.
Continuous waves live on the orbit z0 + nU at a fixed time, discrete ones on
the row n of the (m, n) lattice with z = base + (m - n) W and nu = nu0 + m + n.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from exceptions import DegenerateConfigurationError, NormalizationError, WindowUnderflowError
from jets.jet import Jet
from psdiff.operators import PsDiffOperator
from psdiff.sites import SiteSequence

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-9
ORBIT_SPACING_SHARE = 0.5
VARIANTS = ("continuous", "discrete")


@dataclass(frozen=True)
class Dressing:
    """Wave operator, its inverse and L = Phi T Phi^-1 for one window of sites."""

    waves: SiteSequence
    phi: PsDiffOperator
    phi_inverse: PsDiffOperator
    L: PsDiffOperator
    residual: float

    @property
    def depth(self) -> int:
        return -self.phi.floor


def wave_window(depth: int, power: int = 1, margin: int = 1) -> tuple:
    """Sites (lo, hi) of a wave window whose L^power covers [-margin, margin]."""
    lo = -margin - (2 * depth - 1) - (depth - 1 if power > 1 else 0)
    hi = margin + power
    return lo, hi


def continuous_waves(wave, z0: complex, U: complex, t: float, depth: int, lo: int, hi: int) -> SiteSequence:
    """phi_n = sum_s xi_s(z0 + nU, t) k^-s for n = lo..hi."""
    z = complex(z0) + np.arange(lo, hi + 1) * complex(U)
    xi = np.asarray(wave.xi_stack(depth, z, t))
    return SiteSequence(lo, [Jet(0, xi[:, i]) for i in range(z.size)])


def discrete_waves(wave, base: complex, nu0: complex, row: int, depth: int, lo: int, hi: int) -> SiteSequence:
    """phi(m, row) = sum_s xi_s(base + (m - row) W, nu0 + m + row) k^-s for m = lo..hi."""
    m = np.arange(lo, hi + 1)
    z = complex(base) + (m - row) * wave.W
    xi = np.asarray(wave.xi_stack(depth, z, complex(nu0) + m + row))
    return SiteSequence(lo, [Jet(0, xi[:, i]) for i in range(z.size)])


def orbit_origin(
    lattice,
    poles: Sequence[complex],
    step: complex,
    lo: int,
    hi: int,
    rng: np.random.Generator,
    clearance: float,
    tries: int = 500,
) -> complex:
    """
    Random z0 whose sites z0 + n step, lo <= n <= hi, keep clearance from every pole.

    Candidates are drawn uniformly over the period cell. Long windows wind
    around the torus and cannot all keep a fixed distance from the poles, so
    when no draw reaches the clearance the draw with the widest gap is taken,
    provided that gap is at least half the spacing the sites would have if
    they were spread evenly around the poles.

    Raises:
        DegenerateConfigurationError: If no such point is found
    """
    sites = np.arange(lo, hi + 1) * complex(step)
    poles = np.asarray(poles, dtype=complex).reshape(-1)
    g1, g2 = lattice.generators
    z0 = rng.uniform(0, 1, tries) * g1 + rng.uniform(0, 1, tries) * g2
    if not poles.size:
        return complex(z0[0])

    offsets = (sites[:, None] - poles[None, :]).reshape(-1)
    gaps = lattice.distance_to_lattice(z0[:, None] + offsets[None, :]).min(axis=1)
    passing = np.flatnonzero(gaps > clearance)
    if passing.size:
        return complex(z0[passing[0]])

    area = abs((np.conj(g1) * g2).imag)
    floor = min(clearance, ORBIT_SPACING_SHARE * np.sqrt(area / (np.pi * offsets.size)))
    best = int(np.argmax(gaps))
    if gaps[best] >= floor:
        logger.info(
            f"Orbit of {sites.size} sites: clearance {clearance} out of reach, using widest gap {gaps[best]:.3g}"
        )
        return complex(z0[best])
    raise DegenerateConfigurationError(
        f"No orbit of {sites.size} sites keeps distance {floor:.3g} from the poles after {tries} draws"
    )


def wave_operator(waves: SiteSequence, variant: str = "continuous") -> PsDiffOperator:
    """
    Phi = sum_s phi_s(n) T^-s read off a window of wave jets, floor -S.

    Raises:
        NormalizationError: If a jet is not of lead 0 or its leading coefficient is not admissible
    """
    if variant not in VARIANTS:
        raise ValueError(f"Unknown dressing variant {variant!r}")
    depth = min(jet.depth for jet in waves)
    for n in waves.sites:
        jet = waves[n]
        if jet.lead != 0:
            raise NormalizationError(f"Wave jet at site {n} has lead {jet.lead}; strip k^n first")
        leading = jet.coeffs[0]
        if variant == "continuous" and abs(leading - 1) > UNIT_TOLERANCE:
            raise NormalizationError(f"Wave jet at site {n} has leading coefficient {leading:.6g}, not 1")
        if leading == 0:
            raise NormalizationError(f"Wave jet at site {n} vanishes at leading order")
    table = np.array([waves[n].coeffs[: depth + 1] for n in waves.sites]).T
    return PsDiffOperator(waves.lo, waves.hi, {-s: table[s] for s in range(depth + 1)}, -depth)


def dress(waves: SiteSequence, variant: str = "continuous") -> Dressing:
    """
    Dress a window of normalized wave jets.

    Args:
        waves: Jets phi_n of lead 0 and a common depth S
        variant: 'continuous' requires phi_0 = 1; 'discrete' allows any nonzero phi_0

    Returns:
        Dressing with Phi on the input window, Phi^-1 on [lo + S, hi] and L on
        [lo + 2S - 1, hi - 1]; residual is max |(L - k) psi| over L's window,
        relative to the largest wave coefficient

    Raises:
        NormalizationError: If a jet is not of lead 0 or its leading coefficient is not admissible
        WindowUnderflowError: If the window is too short for the depth
    """
    depth = min(jet.depth for jet in waves)
    lo, hi = waves.window
    if hi - lo < 2 * depth:
        raise WindowUnderflowError(lo + 2 * depth, waves.window)
    phi = wave_operator(waves, variant)
    phi_inverse = phi.inverse()
    L = phi.compose(PsDiffOperator.shift(lo, hi)).compose(phi_inverse)
    residual = eigen_residual(L, waves, 1.0)
    scale = max(1.0, waves.max_abs())
    logger.debug(f"Dressed window [{lo}, {hi}] at depth {depth}: (L - k) psi residual {residual / scale:.3e}")
    return Dressing(waves, phi, phi_inverse, L, residual / scale)


def _applied_sites(operator: PsDiffOperator, waves: SiteSequence) -> range:
    if not operator.coeffs:
        raise ValueError("Zero operator has no eigen-jets")
    lo = max(operator.lo, waves.lo - operator.bottom)
    hi = min(operator.hi, waves.hi - operator.top)
    if lo > hi:
        raise WindowUnderflowError(lo, waves.window)
    return range(lo, hi + 1)


def _applied(operator: PsDiffOperator, waves: SiteSequence, n: int) -> Jet:
    """(A psi)_n / k^n = sum_j a_j(n) k^j phi_(n+j)."""
    total: Optional[Jet] = None
    for j, a in operator.coeffs.items():
        term = waves[n + j].scale_shift(a[n - operator.lo], j)
        total = term if total is None else total + term
    if operator.floor is not None and operator.floor > total.floor:
        total = total.truncate(operator.floor)
    return total


def eigen_jets(operator: PsDiffOperator, waves: SiteSequence) -> SiteSequence:
    """(A psi)_n / psi_n as jets; constant in n when psi is an eigenfunction."""
    sites = _applied_sites(operator, waves)
    return SiteSequence(sites.start, [_applied(operator, waves, n) / waves[n] for n in sites])


def eigen_residual(operator: PsDiffOperator, waves: SiteSequence, eigenvalue) -> float:
    """
    Largest coefficient of (A - a(k)) psi / k^n over the admissible sites.

    Args:
        operator: A
        waves: phi_n
        eigenvalue: a(k) as a Jet, or a number c standing for c k
    """
    worst = 0.0
    for n in _applied_sites(operator, waves):
        if isinstance(eigenvalue, Jet):
            expected = waves[n] * eigenvalue
        else:
            expected = waves[n].scale_shift(eigenvalue, 1)
        worst = max(worst, _applied(operator, waves, n).max_abs_difference(expected))
    return worst
