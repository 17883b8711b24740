"""
Base Tau Model

Defines the interface shared by all tau-function families: evaluation on
batches of points, flow partials (analytic where a family provides them,
fourth-order finite differences otherwise), z-gradients, the monodromy fit
and the holomorphy probe.
"""

import logging
from abc import ABC, abstractmethod
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from exceptions import NotASectionError
from special.theta import as_points

logger = logging.getLogger(__name__)

Times = Mapping[str, complex]
PartialKey = Tuple[str, ...]

DEFAULT_FD_STEP = 1e-4
DEFAULT_FD_STEP_SECOND = 2e-3

_FIRST_STENCIL = ((-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0))
_SECOND_STENCIL = ((-2, -1.0 / 12.0), (-1, 16.0 / 12.0), (0, -30.0 / 12.0), (1, 16.0 / 12.0), (2, -1.0 / 12.0))


class TauModel(ABC):
    """
    Holomorphic section over C^d with declared lattice and flow variables.

    Subclasses implement `_evaluate` on an (n, d) array and may override
    `_analytic_partial` and `_analytic_gradient`.
    """

    def __init__(self, dim: int, flows: Sequence[str], fd_step: float = DEFAULT_FD_STEP,
                 fd_step_second: float = DEFAULT_FD_STEP_SECOND):
        self.dim = int(dim)
        self.flows = tuple(flows)
        self.fd_step = fd_step
        self.fd_step_second = fd_step_second

    @property
    def scale(self) -> float:
        """Length scale of the lattice used for finite-difference steps."""
        return 1.0

    @property
    @abstractmethod
    def lattice_generators(self) -> List[np.ndarray]:
        """Generators of the period lattice as d-vectors."""

    @abstractmethod
    def _evaluate(self, points: np.ndarray, times: Times) -> np.ndarray:
        """Evaluate on an (n, d) array of points."""

    def _analytic_partial(self, points: np.ndarray, times: Times, key: PartialKey) -> Optional[np.ndarray]:
        return None

    def _analytic_gradient(self, points: np.ndarray, times: Times) -> Optional[np.ndarray]:
        return None

    def evaluate(self, z, times: Optional[Times] = None) -> Union[complex, np.ndarray]:
        """Evaluate tau at a point or a batch of points."""
        points, single = as_points(z, self.dim)
        values = self._evaluate(points, times or {})
        return complex(values[0]) if single else values

    def partial(self, z, times: Optional[Times], key: PartialKey) -> Union[complex, np.ndarray]:
        """
        Flow derivative of tau of order at most two.

        Args:
            z: Point or batch
            times: Flow values
            key: Flow names to differentiate by, e.g. ("t",) or ("xi", "eta")

        Returns:
            Complex value or array matching the input batch
        """
        key = tuple(key)
        if len(key) > 2:
            raise ValueError(f"Partials of order {len(key)} are not supported")
        for flow in key:
            if flow not in self.flows:
                raise ValueError(f"Unknown flow '{flow}' for {type(self).__name__}; flows are {self.flows}")
        points, single = as_points(z, self.dim)
        times = dict(times or {})
        values = self._analytic_partial(points, times, key)
        if values is None:
            values = self._finite_difference_partial(points, times, key)
        return complex(values[0]) if single else values

    def _finite_difference_partial(self, points: np.ndarray, times: Dict[str, complex], key: PartialKey) -> np.ndarray:
        if len(key) == 0:
            return self._evaluate(points, times)

        def shifted(offsets: Mapping[str, complex]) -> np.ndarray:
            moved = dict(times)
            for flow, delta in offsets.items():
                moved[flow] = moved.get(flow, 0.0) + delta
            return self._evaluate(points, moved)

        if len(key) == 1:
            h = self.fd_step * self.scale
            return sum(w * shifted({key[0]: j * h}) for j, w in _FIRST_STENCIL) / h
        a, b = key
        if a == b:
            h = self.fd_step_second * self.scale
            return sum(w * shifted({a: j * h}) for j, w in _SECOND_STENCIL) / (h * h)
        h = self.fd_step_second * self.scale
        total = 0.0
        for i, wi in _FIRST_STENCIL:
            for j, wj in _FIRST_STENCIL:
                total = total + wi * wj * shifted({a: i * h, b: j * h})
        return total / (h * h)

    def gradient(self, z, times: Optional[Times] = None) -> np.ndarray:
        """Complex gradient d tau / d z_j as an (n, d) array (or (d,) for one point)."""
        points, single = as_points(z, self.dim)
        times = times or {}
        grad = self._analytic_gradient(points, times)
        if grad is None:
            h = self.fd_step * self.scale
            columns = []
            for j in range(self.dim):
                unit = np.zeros(self.dim)
                unit[j] = h
                columns.append(sum(w * self._evaluate(points + k * unit, times) for k, w in _FIRST_STENCIL) / h)
            grad = np.stack(columns, axis=1)
        return grad[0] if single else grad

    def directional_derivative(self, z, direction, times: Optional[Times] = None):
        grad = self.gradient(z, times)
        return grad @ np.atleast_1d(np.asarray(direction, dtype=complex))

    def holomorphy_residual(self, probes: np.ndarray, times: Optional[Times] = None, h: Optional[float] = None) -> float:
        """
        Largest Cauchy-Riemann defect of central differences at the probes.

        Compares the derivative along the real and the imaginary axis of each
        coordinate; zero for a holomorphic function up to rounding.
        """
        points, _ = as_points(probes, self.dim)
        times = times or {}
        h = h or 1e-4 * self.scale
        worst = 0.0
        for j in range(self.dim):
            unit = np.zeros(self.dim)
            unit[j] = 1.0
            along_real = (self._evaluate(points + h * unit, times) - self._evaluate(points - h * unit, times)) / (2 * h)
            along_imag = (self._evaluate(points + 1j * h * unit, times) - self._evaluate(points - 1j * h * unit, times)) / (
                2j * h
            )
            scale = np.maximum(np.abs(along_real) + np.abs(along_imag), 1e-300)
            worst = max(worst, float(np.max(np.abs(along_real - along_imag) / scale)))
        return worst

    def analytic_monodromy(self, generator: np.ndarray, times: Times) -> Optional[Tuple[np.ndarray, complex]]:
        """Closed-form (a, b) for a lattice generator, if the family knows it."""
        return None


def tau_partials(
    model: TauModel,
    z,
    times: Optional[Times],
    keys: Sequence[PartialKey],
) -> Dict[PartialKey, Union[complex, np.ndarray]]:
    """
    Evaluate several flow partials at once.

    Args:
        model: Tau model
        z: Point or batch
        times: Flow values
        keys: Requested keys, each a tuple of at most two flow names

    Returns:
        Mapping from key to values
    """
    return {tuple(key): model.partial(z, times, tuple(key)) for key in keys}


def monodromy_check(
    model: TauModel,
    generator,
    times: Optional[Times] = None,
    rng: Optional[np.random.Generator] = None,
    probes: int = 20,
    spread: float = 0.3,
) -> Tuple[np.ndarray, complex, float]:
    """
    Fit tau(z + lam) = exp(a . z + b) tau(z) and measure it at fresh probes.

    The fit uses d + 1 points clustered around a base point so the phase of
    each ratio stays on one branch; b is returned modulo 2 pi i.

    Returns:
        (a, b, max relative residual at the fresh probes)

    Raises:
        NotASectionError: If the residual exceeds 1e-6
    """
    rng = rng or np.random.default_rng(0)
    times = times or {}
    lam = np.atleast_1d(np.asarray(generator, dtype=complex))
    d = model.dim
    scale = model.scale

    def draw(count: int) -> np.ndarray:
        return scale * spread * (rng.uniform(-1, 1, (count, d)) + 1j * rng.uniform(-1, 1, (count, d)))

    step = 0.05 * scale
    base = draw(1)[0]
    fit_points = np.vstack([base] + [base + step * np.eye(d)[j] for j in range(d)])
    ratios = model.evaluate(fit_points + lam, times) / model.evaluate(fit_points, times)
    a = np.array([np.log(ratios[j + 1] / ratios[0]) / step for j in range(d)])
    b = complex(np.log(ratios[0]) - a @ base)

    fresh = draw(probes)
    lhs = model.evaluate(fresh + lam, times)
    rhs = np.exp(fresh @ a + b) * model.evaluate(fresh, times)
    residual = float(np.max(np.abs(lhs - rhs) / (np.abs(lhs) + np.abs(rhs) + 1e-300)))
    logger.debug(f"Monodromy check for lambda={lam.tolist()}: residual {residual:.2e}")
    if residual > 1e-6:
        raise NotASectionError(residual)
    return a, b, residual


class ConstantTau(TauModel):
    """tau = const on C^d with any named flows; every flow partial vanishes."""

    def __init__(self, dim: int = 1, flows: Sequence[str] = (), value: complex = 1.0, **kwargs):
        super().__init__(dim, flows, **kwargs)
        self.value = complex(value)

    @property
    def lattice_generators(self) -> List[np.ndarray]:
        return [row for row in np.eye(self.dim, dtype=complex)]

    def _evaluate(self, points: np.ndarray, times: Times) -> np.ndarray:
        return np.full(points.shape[0], self.value, dtype=complex)

    def _analytic_partial(self, points: np.ndarray, times: Times, key: PartialKey) -> np.ndarray:
        if len(key) == 0:
            return self._evaluate(points, times)
        return np.zeros(points.shape[0], dtype=complex)

    def _analytic_gradient(self, points: np.ndarray, times: Times) -> np.ndarray:
        return np.zeros(points.shape, dtype=complex)
