"""
Residual reports

Every identity check produces a ResidualReport: a per-sample table of left
and right sides with the scale-free relative residual, plus summary
statistics. Samples where a factor of the identity vanishes are kept in the
table but flagged and excluded from the statistics.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

RESIDUAL_FLOOR = 1e-300
FACTOR_THRESHOLD = 1e-6


def relative_residual(lhs, rhs, floor: float = RESIDUAL_FLOOR) -> np.ndarray:
    """|lhs - rhs| / (|lhs| + |rhs| + floor), elementwise."""
    lhs = np.asarray(lhs, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    return np.abs(lhs - rhs) / (np.abs(lhs) + np.abs(rhs) + floor)


@dataclass
class ResidualReport:
    """
    Per-sample residuals of one identity.

    The table has at least the columns lhs, rhs, residual and flagged;
    variants add their own columns (sample coordinates, lattice site, ...).
    """

    identity: str
    table: pd.DataFrame
    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_sides(
        cls,
        identity: str,
        lhs,
        rhs,
        flagged=None,
        columns: Optional[Dict[str, Any]] = None,
        extra: Optional[Dict[str, Any]] = None,
    ) -> "ResidualReport":
        lhs = np.atleast_1d(np.asarray(lhs, dtype=complex))
        rhs = np.atleast_1d(np.asarray(rhs, dtype=complex))
        flagged = np.zeros(lhs.shape, dtype=bool) if flagged is None else np.asarray(flagged, dtype=bool)
        data = dict(columns or {})
        data.update({"lhs": lhs, "rhs": rhs, "residual": relative_residual(lhs, rhs), "flagged": flagged})
        report = cls(identity, pd.DataFrame(data), dict(extra or {}))
        if flagged.any():
            logger.warning(f"{identity}: {int(flagged.sum())} of {flagged.size} samples flagged and skipped")
        return report

    @classmethod
    def from_scaled_sides(
        cls,
        identity: str,
        lhs,
        rhs,
        scale: Optional[float] = None,
        columns: Optional[Dict[str, Any]] = None,
        extra: Optional[Dict[str, Any]] = None,
    ) -> "ResidualReport":
        """
        Residuals |lhs - rhs| / scale for identities between operator coefficients.

        Coefficients that vanish on both sides are common there, so the scale is
        shared by all samples: by default max(1, largest |lhs|, largest |rhs|).
        """
        lhs = np.atleast_1d(np.asarray(lhs, dtype=complex))
        rhs = np.atleast_1d(np.asarray(rhs, dtype=complex))
        if scale is None:
            scale = max(1.0, float(np.max(np.abs(lhs), initial=0.0)), float(np.max(np.abs(rhs), initial=0.0)))
        data = dict(columns or {})
        data.update(
            {"lhs": lhs, "rhs": rhs, "residual": np.abs(lhs - rhs) / scale, "flagged": np.zeros(lhs.shape, dtype=bool)}
        )
        report = cls(identity, pd.DataFrame(data), dict(extra or {}))
        report.extra.setdefault("scale", scale)
        return report

    @property
    def samples(self) -> int:
        return int(len(self.table))

    @property
    def valid(self) -> pd.DataFrame:
        return self.table[~self.table["flagged"]]

    @property
    def max_residual(self) -> float:
        valid = self.valid
        return float(valid["residual"].max()) if len(valid) else float("nan")

    @property
    def median_residual(self) -> float:
        valid = self.valid
        return float(valid["residual"].median()) if len(valid) else float("nan")

    @property
    def max_absolute(self) -> float:
        """Largest |lhs - rhs| over unflagged samples."""
        valid = self.valid
        if not len(valid):
            return float("nan")
        return float(np.max(np.abs(valid["lhs"].to_numpy() - valid["rhs"].to_numpy())))

    def passed(self, tolerance: float) -> bool:
        return bool(len(self.valid)) and self.max_residual < tolerance

    def summary(self) -> Dict[str, Any]:
        summary = {
            "identity": self.identity,
            "samples": self.samples,
            "flagged": int(self.table["flagged"].sum()),
            "max_residual": self.max_residual,
            "median_residual": self.median_residual,
        }
        summary.update(self.extra)
        return summary

    def __repr__(self) -> str:
        return f"ResidualReport({self.identity}, samples={self.samples}, max={self.max_residual:.3e})"


def sample_points(
    rng: np.random.Generator,
    count: int,
    dim: int,
    factors: Callable[[np.ndarray], np.ndarray],
    spread: float = 0.4,
    center=None,
    threshold: float = FACTOR_THRESHOLD,
    max_rounds: int = 20,
) -> np.ndarray:
    """
    Draw points whose factor values all exceed threshold times the local scale.

    Args:
        rng: Random generator
        count: Number of points
        dim: Dimension d
        factors: Map (n, d) -> (n, k) of the quantities that must not vanish
        spread: Half-width of the sampling box
        center: Box center
        threshold: Rejection level relative to the largest magnitude per factor

    Returns:
        (count, dim) complex array
    """
    center = np.zeros(dim, dtype=complex) if center is None else np.atleast_1d(np.asarray(center, dtype=complex))

    def draw(n: int) -> np.ndarray:
        return center + spread * (rng.uniform(-1, 1, (n, dim)) + 1j * rng.uniform(-1, 1, (n, dim)))

    points = draw(count)
    for _ in range(max_rounds):
        values = np.abs(np.asarray(factors(points)).reshape(count, -1))
        scale = np.max(values, axis=0, keepdims=True)
        bad = np.any(values < threshold * scale, axis=1)
        if not bad.any():
            return points
        points[bad] = draw(int(bad.sum()))
    logger.warning(f"Sampling kept {int(bad.sum())} points near a zero after {max_rounds} rounds")
    return points


def flag_small(values: np.ndarray, threshold: float = FACTOR_THRESHOLD) -> np.ndarray:
    """Rows of an (n, k) factor array with some entry below threshold times its column maximum."""
    magnitudes = np.abs(np.asarray(values))
    if magnitudes.ndim == 1:
        magnitudes = magnitudes[:, None]
    scale = np.maximum(np.max(magnitudes, axis=0, keepdims=True), RESIDUAL_FLOOR)
    return np.any(magnitudes < threshold * scale, axis=1)
