"""
Kummer collinearity test.

Three points of the Kummer image lie on a line exactly when every 3 x 3 minor
of the stacked coordinate rows vanishes. Rows are scaled to unit largest
entry so the minors are comparable across configurations.
"""

import itertools
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from exceptions import VacuousCaseError
from special.theta import RiemannMatrix, kummer_coordinates

logger = logging.getLogger(__name__)

TRISECANT_CASES = ("i", "ii", "iii")


def _unit_row(row: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(row))
    return row / peak if peak > 0 else row


def kummer_rows(
    B: RiemannMatrix,
    points: Sequence[Sequence[complex]],
    case: str,
    direction: Optional[Sequence[complex]] = None,
    second_direction: Optional[Sequence[complex]] = None,
) -> np.ndarray:
    """
    The 3 x 2^g matrix of the collinearity test.

    Case (iii) stacks K at three points. Case (ii) stacks K at the first two
    points and the V-derivative row at the second. Case (i) stacks K, its
    V-derivative and d_V^2 K + d_W K at the first point.
    """
    if case not in TRISECANT_CASES:
        raise ValueError(f"Unknown trisecant case '{case}'; expected one of {TRISECANT_CASES}")
    if case != "iii" and direction is None:
        raise ValueError(f"Case ({case}) needs a direction V")
    points = [np.atleast_1d(np.asarray(p, dtype=complex)) for p in points]
    if case == "iii":
        rows = [kummer_coordinates(p, B) for p in points[:3]]
    elif case == "ii":
        rows = [kummer_coordinates(points[0], B), kummer_coordinates(points[1], B)]
        rows.append(kummer_coordinates(points[1], B, direction=direction))
    else:
        base = points[0]
        flex = kummer_coordinates(base, B, derivatives=[direction, direction])
        if second_direction is not None:
            flex = flex + kummer_coordinates(base, B, direction=second_direction)
        rows = [kummer_coordinates(base, B), kummer_coordinates(base, B, direction=direction), flex]
    return np.vstack([_unit_row(row) for row in rows])


def trisecant_rank(
    B: RiemannMatrix,
    points: Sequence[Sequence[complex]],
    case: str = "iii",
    direction: Optional[Sequence[complex]] = None,
    second_direction: Optional[Sequence[complex]] = None,
) -> Tuple[pd.DataFrame, float]:
    """
    All 3 x 3 minors of the Kummer rows and the largest of their magnitudes.

    Args:
        B: Riemann matrix with g >= 2
        points: Z-values (three for case iii, two for case ii, one for case i)
        case: 'i', 'ii' or 'iii'
        direction: Derivative direction V for cases i and ii
        second_direction: Optional W entering the case (i) flex row

    Returns:
        (DataFrame with columns 'columns' and 'minor', max |minor|)

    Raises:
        VacuousCaseError: For g = 1, where the image lies in a projective line
    """
    if B.g < 2:
        raise VacuousCaseError(
            "For g = 1 the Kummer image lies in a projective line, so any three points are collinear"
        )
    matrix = kummer_rows(B, points, case, direction, second_direction)
    records = []
    for cols in itertools.combinations(range(matrix.shape[1]), 3):
        minor = complex(np.linalg.det(matrix[:, cols]))
        records.append({"columns": ",".join(str(c) for c in cols), "minor": minor, "abs_minor": abs(minor)})
    table = pd.DataFrame.from_records(records)
    largest = float(table["abs_minor"].max())
    logger.info(f"Trisecant case ({case}): {len(table)} minors, max |minor| {largest:.3e}")
    return table, largest
