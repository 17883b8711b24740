"""
Lax identities of the dressed operator.

Continuous: psi_t = (T - u) psi gives, for every m,
    d/dt L^m = [T - u, L^m],
    d/dt L^m_+ - [T - u, L^m_+] = (F_m(n + 1) - F_m(n)) T,
    F^1_m(n + 1) - F^1_m(n) = d/dt F_m,
    F^2_m(n + 1) - F^2_m(n) = d/dt F^1_m + F^1_m (u(n) - u(n - 1)),
with F^q_m the coefficient of T^-q in L^m. Time derivatives are taken by
finite differences over dressings on a uniform t-grid, never from the wave.

Discrete: psi(m, n + 1) = (T + u_n) psi(m, n) gives
    L^i_{n+1} (T + u_n) = (T + u_n) L^i_n,
    L^i_{n+1,+} (T + u_n) - (T + u_n) L^i_{n,+} = -(F_i(m, n + 1) - F_i(m + 1, n)) T.
"""

import logging
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from psdiff.dressing import Dressing, continuous_waves, discrete_waves, dress, wave_window
from psdiff.operators import PsDiffOperator
from psdiff.sites import SiteSequence
from residuals.report import ResidualReport
from utils.numeric_utils import RESOLUTION_TOLERANCE, NumericUtils

logger = logging.getLogger(__name__)

DEFAULT_POWERS = (2, 3)
DEFAULT_STEP = 1e-3
DEFAULT_NODES = 9


def _operator_sides(lhs: PsDiffOperator, rhs: PsDiffOperator) -> Dict[str, np.ndarray]:
    """Paired coefficients over the common window and the powers both sides vouch for."""
    lo, hi = max(lhs.lo, rhs.lo), min(lhs.hi, rhs.hi)
    floors = [f for f in (lhs.floor, rhs.floor) if f is not None]
    floor = max(floors) if floors else None
    powers = sorted(
        {p for p in set(lhs.coeffs) | set(rhs.coeffs) if floor is None or p >= floor}, reverse=True
    )
    columns: Dict[str, List] = {"power": [], "site": [], "lhs": [], "rhs": []}
    sites = np.arange(lo, hi + 1)
    for p in powers:
        columns["power"].extend([p] * sites.size)
        columns["site"].extend(sites.tolist())
        columns["lhs"].extend(lhs.coefficient(p).restrict(lo, hi).to_array())
        columns["rhs"].extend(rhs.coefficient(p).restrict(lo, hi).to_array())
    return {name: np.asarray(values) for name, values in columns.items()}


def _sequence_sides(lhs: SiteSequence, rhs: SiteSequence) -> Dict[str, np.ndarray]:
    lo, hi = max(lhs.lo, rhs.lo), min(lhs.hi, rhs.hi)
    return {
        "power": np.zeros(hi - lo + 1, dtype=int),
        "site": np.arange(lo, hi + 1),
        "lhs": lhs.restrict(lo, hi).to_array(),
        "rhs": rhs.restrict(lo, hi).to_array(),
    }


def _collect(identity: str, parts: Sequence[tuple]) -> ResidualReport:
    """Merge (relation, power m, sides) triples into one report, each scaled on its own."""
    frames, worst = [], {}
    for relation, m, sides in parts:
        sides = dict(sides)
        lhs, rhs = sides.pop("lhs"), sides.pop("rhs")
        columns = {"relation": relation, "m": m}
        columns.update(sides)
        part = ResidualReport.from_scaled_sides(identity, lhs, rhs, columns=columns)
        frames.append(part.table)
        key = f"{relation}_{m}"
        worst[key] = part.max_residual
    report = ResidualReport(identity, pd.concat(frames, ignore_index=True), {"max_by_relation": worst})
    logger.info(f"{identity}: max scaled residual {report.max_residual:.3e} over {len(worst)} relations")
    return report


def time_derivative(operators: Sequence[PsDiffOperator], step: float, tolerance: float = RESOLUTION_TOLERANCE):
    """
    d/dt of the operator at the central node of a uniform t-grid.

    Raises:
        ValueError: If the operators do not share a window
        DerivativeResolutionError: If the grid fails the Richardson test
    """
    center = operators[len(operators) // 2]
    if any(op.window != center.window for op in operators):
        raise ValueError("Operators on a t-grid must share their window")
    powers = set().union(*(op.coeffs for op in operators))
    size = center.hi - center.lo + 1
    coeffs = {}
    for p in powers:
        stack = np.stack([op.coeffs.get(p, np.zeros(size, dtype=complex)) for op in operators])
        coeffs[p] = NumericUtils.checked_derivative(stack, step, tolerance=tolerance)[len(operators) // 2]
    return PsDiffOperator(center.lo, center.hi, coeffs, center.floor)


def _flow_operator(potential: SiteSequence, sign: float) -> PsDiffOperator:
    """T + sign * u on the window of u."""
    return PsDiffOperator(potential.lo, potential.hi, {1: 1.0, 0: sign * potential.to_array()})


def continuous_lax_identities(
    dressings: Sequence[Dressing],
    potential: SiteSequence,
    step: float,
    powers: Sequence[int] = DEFAULT_POWERS,
    tolerance: float = RESOLUTION_TOLERANCE,
) -> ResidualReport:
    """
    Residuals of the continuous Lax identities at the central node of a t-grid.

    Args:
        dressings: Dressings of the same window at t0 + j step, j = -J..J (at least 9 nodes)
        potential: u(n) at t0 on a window containing the dressings' sites
        step: Grid spacing
        powers: Exponents m
        tolerance: Richardson tolerance of the time derivatives

    Returns:
        ResidualReport 'lax' with relations full, plus, lax55 and lax552
    """
    if len(dressings) % 2 == 0 or len(dressings) < DEFAULT_NODES:
        raise ValueError(f"Need an odd number of at least {DEFAULT_NODES} time nodes, got {len(dressings)}")
    A = _flow_operator(potential, -1.0)
    parts = []
    for m in powers:
        series = [d.L.power(m) for d in dressings]
        Lm = series[len(series) // 2]
        dLm = time_derivative(series, step, tolerance)
        parts.append(("full", m, _operator_sides(dLm, A.commutator(Lm))))

        plus = Lm.plus()
        d_plus = time_derivative([op.plus() for op in series], step, tolerance)
        F = Lm.residue(0)
        jump = F.difference()
        rhs = PsDiffOperator(jump.lo, jump.hi, {1: jump.to_array()})
        parts.append(("plus", m, _operator_sides(d_plus - A.commutator(plus), rhs)))

        if Lm.floor is not None and Lm.floor > -1:
            logger.debug(f"L^{m} too shallow for F^1; skipping the residue relations")
            continue
        F1 = Lm.residue(1)
        parts.append(("lax55", m, _sequence_sides(F1.difference(), dLm.residue(0))))
        if Lm.floor is not None and Lm.floor > -2:
            continue
        F2 = Lm.residue(2)
        gradient = potential - potential.shifted(-1)
        parts.append(("lax552", m, _sequence_sides(F2.difference(), dLm.residue(1) + F1 * gradient)))
    return _collect("lax", parts)


def discrete_lax_identities(
    row: Dressing, next_row: Dressing, potential: SiteSequence, powers: Sequence[int] = DEFAULT_POWERS
) -> ResidualReport:
    """
    Residuals of the row-to-row identities between L_n and L_{n+1}.

    Args:
        row: Dressing of row n
        next_row: Dressing of row n + 1 on the same sites m
        potential: u(m, n) over the sites
        powers: Exponents i

    Returns:
        ResidualReport 'discrete_lax' with relations m21 and m25
    """
    B = _flow_operator(potential, 1.0)
    parts = []
    for i in powers:
        here, there = row.L.power(i), next_row.L.power(i)
        parts.append(("m21", i, _operator_sides(there.compose(B), B.compose(here))))
        lhs = there.plus().compose(B) - B.compose(here.plus())
        jump = there.residue(0) - here.residue(0).shifted(1)
        rhs = PsDiffOperator(jump.lo, jump.hi, {1: -jump.to_array()})
        parts.append(("m25", i, _operator_sides(lhs, rhs)))
    return _collect("discrete_lax", parts)


def lax_check(
    wave,
    origin: complex,
    depth: int,
    variant: str = "continuous",
    time: complex = 0.0,
    powers: Sequence[int] = DEFAULT_POWERS,
    step: float = DEFAULT_STEP,
    nodes: int = DEFAULT_NODES,
    row: int = 0,
) -> ResidualReport:
    """
    Dress a wave and check its Lax identities.

    Args:
        wave: Continuous wave (xi_stack, potential, U) or discrete wave (xi_stack, potential, W)
        origin: z0 of the continuous orbit, or the base point of the discrete lattice
        depth: Truncation depth S
        variant: continuous or discrete
        time: t0, or nu0 for the discrete lattice
        powers: Exponents m
        step: t-grid spacing (continuous)
        nodes: Number of t-nodes (continuous)
        row: Row n of the discrete lattice

    Returns:
        ResidualReport of continuous_lax_identities or discrete_lax_identities
    """
    lo, hi = wave_window(depth, max(powers), margin=3)
    if variant == "continuous":
        half = nodes // 2
        times = [float(time) + j * step for j in range(-half, half + 1)]
        dressings = [dress(continuous_waves(wave, origin, wave.U, t, depth, lo, hi)) for t in times]
        z = complex(origin) + np.arange(lo, hi + 1) * wave.U
        potential = SiteSequence.from_array(lo, wave.potential(z, float(time)))
        report = continuous_lax_identities(dressings, potential, step, powers)
    elif variant == "discrete":
        rows = [dress(discrete_waves(wave, origin, time, r, depth, lo, hi), "discrete") for r in (row, row + 1)]
        m = np.arange(lo, hi + 1)
        z = complex(origin) + (m - row) * wave.W
        potential = SiteSequence.from_array(lo, wave.potential(z, complex(time) + m + row))
        report = discrete_lax_identities(rows[0], rows[1], potential, powers)
    else:
        raise ValueError(f"Unknown Lax variant {variant!r}")
    report.extra.update({"variant": variant, "depth": depth})
    return report
