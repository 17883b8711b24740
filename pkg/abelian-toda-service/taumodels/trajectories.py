"""
Root trajectory sources for elliptic polynomial tau functions.

A source answers positions(t), velocities(t) and accelerations(t) as
length-N complex arrays. Tables are read from CSV through pandas and
interpolated with cubic splines.
"""

import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

logger = logging.getLogger(__name__)


class TrajectorySource(ABC):
    """Positions of N roots as functions of the integrated flow variable."""

    @property
    @abstractmethod
    def count(self) -> int:
        """Number of roots."""

    @abstractmethod
    def positions(self, t: float) -> np.ndarray:
        """Root positions at time t."""

    @abstractmethod
    def velocities(self, t: float) -> np.ndarray:
        """Root velocities at time t."""

    @abstractmethod
    def accelerations(self, t: float) -> np.ndarray:
        """Root accelerations at time t."""

    def taylor(self, t: float, order: int) -> np.ndarray:
        """
        Taylor coefficients of the roots about t, array (order + 1, N).

        The default stops at the acceleration, which is exact for paths of degree two.
        """
        out = np.zeros((order + 1, self.count), dtype=complex)
        out[0] = self.positions(t)
        if order >= 1:
            out[1] = self.velocities(t)
        if order >= 2:
            out[2] = 0.5 * np.asarray(self.accelerations(t), dtype=complex)
        return out


class FrozenRoots(TrajectorySource):
    """Roots that do not move."""

    def __init__(self, roots: Sequence[complex]):
        self._roots = np.asarray(roots, dtype=complex)

    @property
    def count(self) -> int:
        return self._roots.size

    def positions(self, t: float) -> np.ndarray:
        return self._roots.copy()

    def velocities(self, t: float) -> np.ndarray:
        return np.zeros_like(self._roots)

    def accelerations(self, t: float) -> np.ndarray:
        return np.zeros_like(self._roots)


class PolynomialPath(TrajectorySource):
    """x(t) = x0 + v0 t + a t^2 / 2 for each root."""

    def __init__(self, x0: Sequence[complex], v0: Sequence[complex], acceleration: Union[complex, Sequence[complex]] = 0.0):
        self.x0 = np.asarray(x0, dtype=complex)
        self.v0 = np.asarray(v0, dtype=complex)
        self.acceleration = np.broadcast_to(np.asarray(acceleration, dtype=complex), self.x0.shape).copy()

    @property
    def count(self) -> int:
        return self.x0.size

    def positions(self, t: float) -> np.ndarray:
        return self.x0 + self.v0 * t + 0.5 * self.acceleration * t * t

    def velocities(self, t: float) -> np.ndarray:
        return self.v0 + self.acceleration * t

    def accelerations(self, t: float) -> np.ndarray:
        return self.acceleration.copy()


class TrajectoryTable(TrajectorySource):
    """
    Tabulated root positions with spline interpolation.

    The CSV has a column t and columns re_x{i}, im_x{i} for each root.
    """

    def __init__(self, t: Sequence[float], positions: np.ndarray):
        self.t = np.asarray(t, dtype=float)
        self._positions = np.asarray(positions, dtype=complex)
        if self._positions.shape[0] != self.t.size:
            raise ValueError("Trajectory table needs one row of positions per time node")
        self._real = CubicSpline(self.t, self._positions.real, axis=0)
        self._imag = CubicSpline(self.t, self._positions.imag, axis=0)

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "TrajectoryTable":
        frame = pd.read_csv(path, comment="#")
        count = sum(1 for column in frame.columns if column.startswith("re_x"))
        positions = np.column_stack([frame[f"re_x{i}"] + 1j * frame[f"im_x{i}"] for i in range(count)])
        logger.info(f"Loaded trajectory table {path}: {len(frame)} nodes, {count} roots")
        return cls(frame["t"].to_numpy(), positions)

    @property
    def count(self) -> int:
        return self._positions.shape[1]

    def positions(self, t: float) -> np.ndarray:
        return self._real(t) + 1j * self._imag(t)

    def velocities(self, t: float) -> np.ndarray:
        return self._real(t, 1) + 1j * self._imag(t, 1)

    def accelerations(self, t: float) -> np.ndarray:
        return self._real(t, 2) + 1j * self._imag(t, 2)
