"""
Theta tau functions tau(z, t) = exp(Q(t)) theta(z + z0 + sum_a t_a U_a | B).

Flow partials are analytic: directional theta derivatives along the flow
vectors combined with the gauge through the product rule.
"""

import logging
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from special.theta import DEFAULT_TOLERANCE, RiemannMatrix, riemann_theta
from taumodels.base_model import PartialKey, TauModel, Times
from taumodels.gauge import QuadraticForm, gauge_partials

logger = logging.getLogger(__name__)


class ThetaTau(TauModel):
    """
    Theta-function tau model with linear flows and a quadratic gauge.

    Args:
        B: Riemann matrix
        flows: Map from flow name to its g-vector
        z0: Base point
        gauge: Quadratic form Q in the flow variables
        tolerance: Theta truncation tail bound
    """

    def __init__(
        self,
        B: RiemannMatrix,
        flows: Mapping[str, Sequence[complex]],
        z0: Optional[Sequence[complex]] = None,
        gauge: Optional[QuadraticForm] = None,
        tolerance: float = DEFAULT_TOLERANCE,
        **kwargs,
    ):
        super().__init__(B.g, list(flows.keys()), **kwargs)
        self.B = B
        self.flow_vectors: Dict[str, np.ndarray] = {
            name: np.atleast_1d(np.asarray(vec, dtype=complex)) for name, vec in flows.items()
        }
        self.z0 = np.zeros(B.g, dtype=complex) if z0 is None else np.atleast_1d(np.asarray(z0, dtype=complex))
        self.gauge = gauge or QuadraticForm()
        self.tolerance = tolerance

    @property
    def lattice_generators(self) -> List[np.ndarray]:
        eye = np.eye(self.dim, dtype=complex)
        return [eye[j] for j in range(self.dim)] + [self.B.column(j) for j in range(self.dim)]

    def with_gauge(self, gauge: QuadraticForm) -> "ThetaTau":
        flows = {name: vec for name, vec in self.flow_vectors.items()}
        return ThetaTau(self.B, flows, self.z0, gauge, self.tolerance)

    def shifted(self, offset: Sequence[complex]) -> "ThetaTau":
        """Same model with the base point moved by offset."""
        flows = {name: vec for name, vec in self.flow_vectors.items()}
        return ThetaTau(self.B, flows, self.z0 + np.asarray(offset, dtype=complex), self.gauge, self.tolerance)

    def argument(self, points: np.ndarray, times: Times) -> np.ndarray:
        shift = self.z0.copy()
        for name, vec in self.flow_vectors.items():
            shift = shift + times.get(name, 0.0) * vec
        return points + shift

    def _theta(self, points: np.ndarray, times: Times, flows: Sequence[str] = ()) -> np.ndarray:
        directions = [self.flow_vectors[name] for name in flows]
        values = riemann_theta(self.argument(points, times), self.B, directions, self.tolerance)
        return np.atleast_1d(values)

    def _evaluate(self, points: np.ndarray, times: Times) -> np.ndarray:
        return np.exp(self.gauge.value(times)) * self._theta(points, times)

    def _analytic_partial(self, points: np.ndarray, times: Times, key: PartialKey) -> Optional[np.ndarray]:
        base = {(): self._theta(points, times)}
        for flow in set(key):
            base[(flow,)] = self._theta(points, times, [flow])
        if len(key) == 2:
            base[key] = self._theta(points, times, list(key))
        return gauge_partials(self.gauge, times, key, base)

    def _analytic_gradient(self, points: np.ndarray, times: Times) -> np.ndarray:
        eye = np.eye(self.dim)
        factor = np.exp(self.gauge.value(times))
        columns = [
            np.atleast_1d(riemann_theta(self.argument(points, times), self.B, [eye[j]], self.tolerance))
            for j in range(self.dim)
        ]
        return factor * np.stack(columns, axis=1)

    def analytic_monodromy(self, generator: np.ndarray, times: Times):
        """Integer shifts are trivial; B-columns give a = -2 pi i e_j, b = -pi i B_jj - 2 pi i w_j."""
        generator = np.asarray(generator, dtype=complex)
        for j in range(self.dim):
            if np.allclose(generator, np.eye(self.dim)[j]):
                return np.zeros(self.dim, dtype=complex), 0j
            if np.allclose(generator, self.B.column(j)):
                shift = self.argument(np.zeros((1, self.dim)), times)[0]
                a = np.zeros(self.dim, dtype=complex)
                a[j] = -2j * np.pi
                return a, complex(-1j * np.pi * self.B.entries[j, j] - 2j * np.pi * shift[j])
        return None
