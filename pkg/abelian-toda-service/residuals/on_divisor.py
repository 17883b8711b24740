"""
Relations on the tau divisor

Evaluations of the secancy identities (and of the wave recursion) at zeros
of tau: the pole-dynamics relation, the two restrictions of the continuous
identity, the discrete triple-ratio relation, the three expressions for tau_A
on the divisor, and the residue formulas for the wave coefficients.

Wave coefficients are read through any object with `xi(s, points, time)`;
the continuous residue checks also need `xi_dot(s, points, time)` and the
normalization constant `b`.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from residuals.report import ResidualReport
from residuals.secancy import SecancyData
from taumodels.base_model import TauModel, Times
from taumodels.divisor import divisor_zeros

logger = logging.getLogger(__name__)

SHIFTED_DIVISOR = 1e-8
CIRCLE_POINTS = 32
CIRCLE_RADIUS = 0.05
DIVISOR_VARIANTS = ("rs", "te12", "f5d", "tauA_consistency", "may_consistency", "residues")


def divisor_points(
    model: TauModel,
    lines: Sequence[Tuple[Sequence[complex], Sequence[complex]]],
    times: Optional[Times] = None,
    cell: Tuple[complex, complex] = (-0.5 - 0.5j, 0.5 + 0.5j),
) -> np.ndarray:
    """Zeros of tau along several lines, stacked as an (n, d) array."""
    found: List[np.ndarray] = []
    for z0, w in lines:
        zeros = divisor_zeros(model, (z0, w), times, cell)
        found.append(zeros.points(z0, w))
    points = np.vstack(found) if found else np.zeros((0, model.dim), dtype=complex)
    logger.debug(f"Collected {points.shape[0]} divisor points on {len(lines)} lines")
    return points


def circle_mean(function, points: np.ndarray, radius: float, count: int = CIRCLE_POINTS) -> np.ndarray:
    """
    Value at each point of a holomorphic function through its mean on a circle.

    For d > 1 the circle lies in the first coordinate plane.
    """
    angles = 2 * np.pi * np.arange(count) / count
    total = np.zeros(points.shape[0], dtype=complex)
    for angle in angles:
        offset = np.zeros(points.shape[1], dtype=complex)
        offset[0] = radius * np.exp(1j * angle)
        total += function(points + offset)
    return total / count


def _vanishing(d: SecancyData, points: np.ndarray, shifts: Sequence[Tuple[object, complex]]) -> np.ndarray:
    """
    Points where tau at one of the shifted arguments is within 1e-8 of zero,
    measured against the mean of |tau| on a small ring around that argument.
    """
    ring = 0.1 * d.tau.scale * np.exp(2j * np.pi * np.arange(8) / 8)
    flagged = np.zeros(points.shape[0], dtype=bool)
    for offset, dt in shifts:
        moved = points if offset is None else points + offset
        value = np.abs(d.at(d.tau, moved, dt=dt))
        unit = np.zeros(points.shape[1], dtype=complex)
        unit[0] = 1.0
        scale = np.mean([np.abs(d.at(d.tau, moved + r * unit, dt=dt)) for r in ring], axis=0)
        flagged |= value < SHIFTED_DIVISOR * scale
    return flagged


class _Rows:
    """Accumulates relation rows sharing the divisor points."""

    def __init__(self, points: np.ndarray):
        self.points = points
        self.lhs: List[np.ndarray] = []
        self.rhs: List[np.ndarray] = []
        self.flags: List[np.ndarray] = []
        self.names: List[np.ndarray] = []
        self.orders: List[np.ndarray] = []

    def add(self, name: str, lhs, rhs, flagged, order: int = -1) -> None:
        count = self.points.shape[0]
        self.lhs.append(np.broadcast_to(np.asarray(lhs, dtype=complex), (count,)))
        self.rhs.append(np.broadcast_to(np.asarray(rhs, dtype=complex), (count,)))
        self.flags.append(np.broadcast_to(np.asarray(flagged, dtype=bool), (count,)))
        self.names.append(np.full(count, name))
        self.orders.append(np.full(count, order))

    def report(self, identity: str, extra: Optional[Dict[str, object]] = None) -> ResidualReport:
        repeat = len(self.lhs)
        columns = {f"z{j}": np.tile(self.points[:, j], repeat) for j in range(self.points.shape[1])}
        columns["relation"] = np.concatenate(self.names)
        columns["s"] = np.concatenate(self.orders)
        return ResidualReport.from_sides(
            identity, np.concatenate(self.lhs), np.concatenate(self.rhs), np.concatenate(self.flags), columns, extra
        )


def on_divisor_checks(
    d: SecancyData,
    points: np.ndarray,
    variant: str,
    wave=None,
    orders: Sequence[int] = (0, 1, 2),
    radius: Optional[float] = None,
) -> ResidualReport:
    """
    Evaluate a relation at divisor points of tau.

    Args:
        d: Secancy data; rs needs only tau, te12 and tauA_consistency need the
            pair and constants, may_consistency and residues need a wave
        points: Zeros of tau at the data's flow time, shape (n, d)
        variant: rs, te12, f5d, tauA_consistency, may_consistency or residues
        wave: Source of wave coefficients for the residue checks
        orders: Orders s for the residue checks
        radius: Circle radius for residues read off holomorphic products

    Returns:
        ResidualReport with a 'relation' column naming each row's identity
    """
    if variant not in DIVISOR_VARIANTS:
        raise ValueError(f"Unknown on-divisor variant '{variant}'; expected one of {DIVISOR_VARIANTS}")
    points = np.asarray(points, dtype=complex).reshape(-1, d.dim)
    rows = _Rows(points)
    radius = radius or CIRCLE_RADIUS * d.tau.scale
    extra: Dict[str, object] = {}

    if variant == "rs":
        _rs_rows(d, points, rows)
    elif variant == "te12":
        _te12_rows(d, points, rows)
    elif variant == "f5d":
        numerator, denominator, flagged = _f5d_terms(d, points)
        ratio = numerator / np.where(denominator == 0, np.nan, denominator)
        rows.add("f5d", numerator, -denominator, flagged)
        defect = np.abs(ratio + 1)[~flagged]
        extra["max_ratio_defect"] = float(defect.max()) if defect.size else float("nan")
    elif variant == "tauA_consistency":
        _tau_a_rows(d, points, rows)
    elif variant == "may_consistency":
        if wave is None:
            raise ValueError("may_consistency needs wave coefficients")
        _may_rows(d, points, rows, wave, orders, radius)
    else:
        if wave is None:
            raise ValueError("residues needs wave coefficients")
        _residue_rows(d, points, rows, wave, orders, radius)

    report = rows.report(variant, extra)
    report.extra.setdefault("max_absolute", report.max_absolute)
    logger.info(f"On-divisor {variant}: {points.shape[0]} points, max residual {report.max_residual:.3e}")
    return report


def _rs_rows(d: SecancyData, points: np.ndarray, rows: _Rows) -> None:
    tau = d.tau
    plus, minus = d.at(tau, points, d.U), d.at(tau, points, -d.U)
    times = d.times
    flow = d.flow
    dot = np.atleast_1d(tau.partial(points, times, (flow,)))
    ddot = np.atleast_1d(tau.partial(points, times, (flow, flow)))
    dot_plus, dot_minus = d.dot(tau, points, d.U), d.dot(tau, points, -d.U)
    lhs = ddot * plus * minus
    rhs = dot * (dot_plus * minus + plus * dot_minus)
    rows.add("rs", lhs, rhs, _vanishing(d, points, [(d.U, 0), (-d.U, 0)]))


def _te12_rows(d: SecancyData, points: np.ndarray, rows: _Rows) -> None:
    tau, tau_A = d.tau, d.tau_A
    tau_U, tau_mU = d.at(tau, points, d.U), d.at(tau, points, -d.U)
    a0, a_mU = d.at(tau_A, points), d.at(tau_A, points, -d.U)
    flagged = _vanishing(d, points, [(d.U, 0), (-d.U, 0)])
    rows.add("te1", (d.dot(tau_A, points) + d.E * a0) * tau_U, d.dot(tau, points, d.U) * a0, flagged)
    rows.add("te2", a0 * tau_mU, -np.exp(-d.p) * d.dot(tau, points) * a_mU, flagged)


def _f5d_terms(d: SecancyData, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    tau, W = d.tau, d.W
    numerator = d.at(tau, points, W, 1) * d.at(tau, points, -2 * W) * d.at(tau, points, W, -1)
    factors = [d.at(tau, points, -W, 1), d.at(tau, points, 2 * W), d.at(tau, points, -W, -1)]
    denominator = factors[0] * factors[1] * factors[2]
    return numerator, denominator, _vanishing(d, points, [(-W, 1), (2 * W, 0), (-W, -1)])


def _tau_a_rows(d: SecancyData, points: np.ndarray, rows: _Rows) -> None:
    tau, tau_A, W, pW, E = d.tau, d.tau_A, d.W, d.p, d.E
    plus2, minus2 = d.at(tau, points, 2 * W), d.at(tau, points, -2 * W)
    flagged = _vanishing(d, points, [(2 * W, 0), (-2 * W, 0)])
    first = np.exp(pW - E) * d.at(tau, points, W, 1) * d.at(tau_A, points, W, -1) / plus2
    second = -np.exp(-pW - E) * d.at(tau, points, -W, 1) * d.at(tau_A, points, -W, -1) / minus2
    rows.add("tauA1=tauA2", first, second, flagged)
    rows.add("tauA1=tauA", first, d.at(tau_A, points), flagged)
    third_lhs = np.exp(-pW) * d.at(tau, points, W, -1) * d.at(tau_A, points, -W, -1)
    third_rhs = np.exp(pW) * d.at(tau, points, -W, -1) * d.at(tau_A, points, W, -1)
    rows.add("tauA3", third_lhs, third_rhs, flagged)


def _may_rows(d: SecancyData, points: np.ndarray, rows: _Rows, wave, orders, radius: float) -> None:
    tau, W, nu = d.tau, d.W, d.time
    plus2, minus2 = d.at(tau, points, 2 * W), d.at(tau, points, -2 * W)
    tau_wp, tau_wm = d.at(tau, points, W, -1), d.at(tau, points, -W, -1)
    flagged = _vanishing(d, points, [(2 * W, 0), (-2 * W, 0), (W, -1), (-W, -1)])

    def tau_s(s: int, offset) -> np.ndarray:
        return np.atleast_1d(wave.xi(s, points + offset, nu - 1)) * d.at(tau, points, offset, -1)

    for s in orders:
        up = d.at(tau, points, W, 1) * tau_s(s, W) / plus2
        down = d.at(tau, points, -W, 1) * tau_s(s, -W) / minus2
        rows.add("may2=-may3", up, -down, flagged, s)
        rows.add("feb1", tau_s(s, -W) * tau_wp, tau_s(s, W) * tau_wm, flagged, s)
        if d.dim == 1:

            def product(z, order=s + 1):
                return np.atleast_1d(wave.xi(order, z, nu)) * np.atleast_1d(tau.evaluate(z, {d.flow: nu}))

            rows.add("may2=residue", up, circle_mean(product, points, radius), flagged, s)


def _residue_rows(d: SecancyData, points: np.ndarray, rows: _Rows, wave, orders, radius: float) -> None:
    tau, U, t = d.tau, d.U, d.time
    times = d.times
    tau_U = d.at(tau, points, U)
    flagged = _vanishing(d, points, [(U, 0), (-U, 0)])

    def holomorphic(s: int, derivative: bool = False):
        def value(z):
            base = np.atleast_1d(tau.evaluate(z, times))
            xi = np.atleast_1d(wave.xi(s, z, t))
            if not derivative:
                return xi * base
            dot = np.atleast_1d(tau.partial(z, times, (d.flow,)))
            return np.atleast_1d(wave.xi_dot(s, z, t)) * base + xi * dot

        return value

    tau_dot = d.dot(tau, points)
    for s in orders:
        residue_next = circle_mean(holomorphic(s + 1), points, radius)
        tau_s = circle_mean(holomorphic(s), points, radius)
        tau_s_dot = circle_mean(holomorphic(s, True), points, radius)
        bl1 = -tau_s_dot - wave.b * tau_s + d.dot(tau, points, U) / tau_U * tau_s
        bl1a = -tau_dot * np.atleast_1d(wave.xi(s, points - U, t))
        rows.add("bl1", residue_next, bl1, flagged, s)
        rows.add("bl1a", residue_next, bl1a, flagged, s)
