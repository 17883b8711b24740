"""
Pole dynamics against the tau divisor.

An RS trajectory defines tau(z, t) = prod_i sigma(z - x_i(t)). At every output
node the pole-dynamics relation is evaluated at the particles, and the zeros
of tau are found again by the argument principle and matched to the
particles modulo the lattice.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from residuals.on_divisor import on_divisor_checks
from residuals.report import ResidualReport
from residuals.secancy import SecancyData
from rsdyn.integrator import RSTrajectory
from special.weierstrass import EllipticLattice
from taumodels.divisor import divisor_zeros
from taumodels.elliptic_tau import EllipticPolynomialTau

logger = logging.getLogger(__name__)

SEARCH_MARGIN = 0.1


def _search_box(positions: np.ndarray, lattice: EllipticLattice) -> Tuple[complex, complex]:
    """
    Square around the particles, narrower than a period so no translate enters twice.

    Each particle is first replaced by its translate closest to the first one.
    """
    positions = positions[0] + lattice.centered(positions - positions[0])
    center = complex(np.mean(positions))
    half = float(np.max(np.abs(positions - center))) + SEARCH_MARGIN * lattice.cell_size
    half = min(half, 0.45 * lattice.cell_size)
    return center - half * (1 + 1j), center + half * (1 + 1j)


def track_zeros(model: EllipticPolynomialTau, t: float) -> float:
    """Largest lattice distance between a recovered zero and its nearest particle."""
    positions = model.roots({model.flow: t})
    lo, hi = _search_box(positions, model.lattice)
    zeros = divisor_zeros(model, ([0.0], [1.0]), {model.flow: t}, (lo, hi))
    if sum(zeros.multiplicities) != positions.size:
        logger.warning(f"t={t:.4g}: found {sum(zeros.multiplicities)} zeros for {positions.size} particles")
        return float("inf")
    worst = 0.0
    for s in zeros.parameters:
        worst = max(worst, float(np.min(model.lattice.distance_to_lattice(s - positions))))
    return worst


def correspondence_check(
    trajectory: RSTrajectory,
    lattice: EllipticLattice,
    kappa: complex,
    U: complex,
    nodes: Optional[Sequence[float]] = None,
    track: bool = True,
) -> ResidualReport:
    """
    Check that the particles sit on a tau divisor obeying the pole relation.

    Args:
        trajectory: Output of integrate
        lattice: Lattice of the tau function
        kappa: Shift the trajectory was integrated with
        U: Shift of the pole-dynamics relation
        nodes: Times to check (default: the trajectory's output nodes)
        track: Also recover the zeros with divisor_zeros

    Returns:
        ResidualReport of the relation with a column t; extra entries
        'max_absolute', 'zero_tracking' and 'kappa'
    """
    nodes = trajectory.nodes if nodes is None else np.asarray(nodes, dtype=float)
    model = EllipticPolynomialTau(lattice, trajectory)
    frames, tracking = [], []
    for t in nodes:
        d = SecancyData(model, None, U=[U], time=float(t))
        report = on_divisor_checks(d, trajectory.positions(t).reshape(-1, 1), "rs")
        frame = report.table.copy()
        frame.insert(0, "t", float(t))
        frames.append(frame)
        if track:
            tracking.append(track_zeros(model, float(t)))

    table = pd.concat(frames, ignore_index=True)
    extra = {"kappa": complex(kappa), "zero_tracking": float(max(tracking)) if tracking else float("nan")}
    report = ResidualReport("rs_correspondence", table, extra)
    report.extra["max_absolute"] = report.max_absolute
    logger.info(
        f"RS correspondence over {len(nodes)} nodes: max residual {report.max_residual:.3e}, "
        f"zero tracking {extra['zero_tracking']:.3e}"
    )
    return report
