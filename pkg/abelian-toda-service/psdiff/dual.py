"""
Dual wave functions and the pairing with psi.

psi+ = k^-n Phi^-1 acts from the left: phi+_n = sum_r chi_r(n + r) k^-r,
where chi_r are the coefficients of Phi^-1. It solves the adjoint equation
    k (phi+_n - phi+_{n-1}) + (u_n + b) phi+_n - d/dt phi+_n = 0
(continuous) or
    k (phi+(m, n - 1) - phi+(m - 1, n)) - u(m, n) phi+(m, n) = 0
(discrete, with phi+(., n) built from Phi_{n+1}). The product phi+ phi has
the coefficients J_m = res_T L^m = F_m.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from jets.jet import Jet
from psdiff.dressing import Dressing, continuous_waves, discrete_waves, dress, wave_operator, wave_window
from psdiff.operators import PsDiffOperator
from psdiff.sites import SiteSequence
from residuals.report import ResidualReport
from utils.numeric_utils import NumericUtils

logger = logging.getLogger(__name__)

DEFAULT_ORDERS = (1, 2, 3, 4)
DEFAULT_RADII = (1e-2, 1e-3)


@dataclass(frozen=True)
class DualPairing:
    """Dual jets phi+_n, products phi+_n phi_n and the residual report."""

    dual: SiteSequence
    products: SiteSequence
    report: ResidualReport

    def J(self, s: int) -> SiteSequence:
        """Coefficient J_s of k^-s in the products."""
        return self.products.map(lambda jet: jet.coefficient(-s))


def dual_waves(phi_inverse: PsDiffOperator) -> SiteSequence:
    """phi+_n = sum_r chi_r(n + r) k^-r on [lo, hi - depth] of the inverse's window."""
    depth = -phi_inverse.floor
    lo, hi = phi_inverse.lo, phi_inverse.hi - depth
    if lo > hi:
        raise ValueError(f"Inverse window [{phi_inverse.lo}, {phi_inverse.hi}] too short for depth {depth}")
    chi = [phi_inverse.coefficient(-r) for r in range(depth + 1)]
    return SiteSequence(lo, [Jet(0, [chi[r][n + r] for r in range(depth + 1)]) for n in range(lo, hi + 1)])


def _coefficients(jets: SiteSequence, depth: int) -> np.ndarray:
    """Array (depth + 1, sites) of the k^-s coefficients."""
    return np.array([jet.coeffs[: depth + 1] for jet in jets]).T


def _products(dual: SiteSequence, waves: SiteSequence, shift: int = 0) -> SiteSequence:
    """phi+_(n) phi_(n + shift) over the common sites."""
    lo = max(dual.lo, waves.lo - shift)
    hi = min(dual.hi, waves.hi - shift)
    return SiteSequence(lo, [dual[n] * waves[n + shift] for n in range(lo, hi + 1)])


def _pairing_parts(products: SiteSequence, L: PsDiffOperator, orders: Sequence[int]) -> List[Tuple]:
    parts = []
    for m in orders:
        F = L.power(m).residue(0)
        J = products.map(lambda jet, m=m: jet.coefficient(-m))
        lo, hi = max(F.lo, J.lo), min(F.hi, J.hi)
        parts.append(
            (
                "pairing",
                m,
                {
                    "site": np.arange(lo, hi + 1),
                    "lhs": J.restrict(lo, hi).to_array(),
                    "rhs": F.restrict(lo, hi).to_array(),
                },
            )
        )
    return parts


def _report(identity: str, parts: Sequence[Tuple]) -> ResidualReport:
    frames, worst = [], {}
    for relation, order, sides in parts:
        sides = dict(sides)
        lhs, rhs = sides.pop("lhs"), sides.pop("rhs")
        columns = {"relation": relation, "order": order}
        columns.update(sides)
        part = ResidualReport.from_scaled_sides(identity, lhs, rhs, columns=columns)
        frames.append(part.table)
        worst[relation] = max(worst.get(relation, 0.0), part.max_residual)
    report = ResidualReport(identity, pd.concat(frames, ignore_index=True), {"max_by_relation": worst})
    logger.info(f"{identity}: " + ", ".join(f"{k} {v:.3e}" for k, v in worst.items()))
    return report


def continuous_dual_identities(
    dressings: Sequence[Dressing],
    potential: SiteSequence,
    b: complex,
    step: float,
    orders: Sequence[int] = DEFAULT_ORDERS,
) -> DualPairing:
    """
    Dual wave, adjoint equation and J = F at the central node of a t-grid.

    Args:
        dressings: Dressings of one window at t0 + j step (odd count, at least 9)
        potential: u(n) at t0
        b: Normalization constant of the time exponent
        step: Grid spacing
        orders: Powers m compared in J_m = F_m

    Returns:
        DualPairing with a report holding the relations adjoint and pairing
    """
    center = dressings[len(dressings) // 2]
    depth = center.depth
    duals = [dual_waves(d.phi_inverse) for d in dressings]
    dual = duals[len(duals) // 2]
    P = _coefficients(dual, depth)
    P_dot = NumericUtils.checked_derivative(np.stack([_coefficients(d, depth) for d in duals]), step)[
        len(duals) // 2
    ]
    sites = np.arange(dual.lo + 1, dual.hi + 1)
    u = np.array([potential[n] for n in sites])
    parts = []
    for s in range(depth):
        here, before = P[s + 1, 1:], P[s + 1, :-1]
        parts.append(
            (
                "adjoint",
                s,
                {"site": sites, "lhs": here - before + (u + b) * P[s, 1:], "rhs": P_dot[s, 1:]},
            )
        )
    products = _products(dual, center.waves)
    parts.extend(_pairing_parts(products, center.L, [m for m in orders if m <= depth]))
    return DualPairing(dual, products, _report("dual", parts))


def discrete_dual_identities(
    row: Dressing, next_row: Dressing, potential: SiteSequence, orders: Sequence[int] = DEFAULT_ORDERS
) -> DualPairing:
    """
    Dual waves of rows n - 1 and n, their adjoint equation and J = F on row n.

    Args:
        row: Dressing of row n
        next_row: Dressing of row n + 1
        potential: u(m, n)
        orders: Powers i compared in J_i = F_i

    Returns:
        DualPairing of phi+(., n - 1) with phi(., n)
    """
    depth = row.depth
    before = dual_waves(row.phi_inverse)
    after = dual_waves(next_row.phi_inverse)
    lo, hi = max(before.lo, after.lo + 1, potential.lo), min(before.hi, after.hi, potential.hi)
    sites = np.arange(lo, hi + 1)
    parts = []
    for s in range(depth):
        lhs = np.array([before[m].coeffs[s + 1] - after[m - 1].coeffs[s + 1] for m in sites])
        rhs = np.array([potential[m] * after[m].coeffs[s] for m in sites])
        parts.append(("adjoint", s, {"site": sites, "lhs": lhs, "rhs": rhs}))
    products = _products(before, row.waves)
    parts.extend(_pairing_parts(products, row.L, [i for i in orders if i <= depth]))
    return DualPairing(before, products, _report("discrete_dual", parts))


def dual_pairing(
    wave,
    origin: complex,
    depth: int,
    variant: str = "continuous",
    time: complex = 0.0,
    orders: Sequence[int] = DEFAULT_ORDERS,
    step: float = 1e-3,
    nodes: int = 9,
    row: int = 0,
) -> DualPairing:
    """
    Build the dual wave of a wave source and check the adjoint equation and J = F.

    The arguments mirror lax_check; the continuous variant needs the wave's b.
    """
    lo, hi = wave_window(depth, max(orders), margin=2)
    if variant == "continuous":
        half = nodes // 2
        times = [float(time) + j * step for j in range(-half, half + 1)]
        dressings = [dress(continuous_waves(wave, origin, wave.U, t, depth, lo, hi)) for t in times]
        z = complex(origin) + np.arange(lo, hi + 1) * wave.U
        potential = SiteSequence.from_array(lo, wave.potential(z, float(time)))
        pairing = continuous_dual_identities(dressings, potential, wave.b, step, orders)
    elif variant == "discrete":
        rows = [dress(discrete_waves(wave, origin, time, r, depth, lo, hi), "discrete") for r in (row, row + 1)]
        m = np.arange(lo, hi + 1)
        z = complex(origin) + (m - row) * wave.W
        potential = SiteSequence.from_array(lo, wave.potential(z, complex(time) + m + row))
        pairing = discrete_dual_identities(rows[0], rows[1], potential, orders)
    else:
        raise ValueError(f"Unknown dual variant {variant!r}")
    pairing.report.extra.update({"variant": variant, "depth": depth})
    return pairing


def dual_pole_order(
    wave,
    point: complex,
    t: float,
    depth: int,
    order: int = 1,
    radii: Sequence[float] = DEFAULT_RADII,
    direction: complex = np.exp(0.2j * np.pi),
) -> float:
    """
    Growth exponent of xi+_order as z0 approaches point.

    Estimates p in |xi+(point + r e)| ~ r^-p from two radii: about 1 at a
    simple pole, about 0 where xi+ is regular.
    """
    magnitudes: Dict[float, float] = {}
    for r in radii:
        z0 = complex(point) + r * direction
        waves = continuous_waves(wave, z0, wave.U, t, depth, -depth, depth)
        dual = dual_waves(wave_operator(waves).inverse())
        magnitudes[r] = abs(dual[0].coeffs[order])
    r1, r2 = radii[0], radii[-1]
    return float(np.log(magnitudes[r2] / magnitudes[r1]) / np.log(r1 / r2))
