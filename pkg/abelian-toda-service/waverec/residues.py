"""
Residues of discrete wave coefficients on the tau divisor.

At a zero of tau(., nu) the residue of xi_{s+1} can be read off in two ways,
through the neighbours z + W and z - W; both must agree and the products
tau_s(z -+ W) tau(z +- W, nu - 1) must balance.
"""

import dataclasses
import logging
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd

from residuals.on_divisor import divisor_points, on_divisor_checks
from residuals.report import ResidualReport
from residuals.secancy import SecancyData

logger = logging.getLogger(__name__)

DEFAULT_ORDERS = (0, 1, 2)


def verify_discrete_residues(
    d: SecancyData,
    wave,
    nus: Sequence[float],
    points: Optional[Callable[[float], np.ndarray]] = None,
    orders: Sequence[int] = DEFAULT_ORDERS,
    radius: Optional[float] = None,
) -> ResidualReport:
    """
    Check the two residue expressions and the balance relation over several levels nu.

    Args:
        d: Discrete secancy data (tau over nu and the shift W)
        wave: Source of xi(s, z, nu)
        nus: Levels to check
        points: Divisor points of tau(., nu) as an (n, d) array (default: found
            by the argument principle along the first coordinate axis)
        orders: Orders s of the checked coefficients
        radius: Circle radius for residues read off holomorphic products

    Returns:
        ResidualReport 'discrete_residues' with columns nu, relation and s;
        points near the divisor shifted by +-2W or by +-W at nu - 1 are flagged
    """
    if not d.discrete:
        raise ValueError("Residue checks need discrete secancy data with a shift W")
    axis = ([0.0] * d.dim, [1.0] + [0.0] * (d.dim - 1))
    frames = []
    for nu in nus:
        level = dataclasses.replace(d, time=nu)
        found = points(nu) if points is not None else divisor_points(d.tau, [axis], {d.flow: nu})
        found = np.asarray(found, dtype=complex).reshape(-1, d.dim)
        if not found.shape[0]:
            logger.warning(f"No divisor points at nu={nu}")
            continue
        report = on_divisor_checks(level, found, "may_consistency", wave, orders, radius)
        frame = report.table.copy()
        frame.insert(0, "nu", nu)
        frames.append(frame)
    if not frames:
        raise ValueError("No divisor points at any of the requested levels")
    result = ResidualReport("discrete_residues", pd.concat(frames, ignore_index=True), {"levels": len(frames)})
    result.extra["max_absolute"] = result.max_absolute
    logger.info(f"Discrete residues over {len(frames)} levels: max residual {result.max_residual:.3e}")
    return result
