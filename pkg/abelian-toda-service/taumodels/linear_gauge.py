"""
Linear gauge transformation tau -> exp(l . z + sum_a c_a t_a + c0) tau.
"""

from typing import List, Mapping, Optional, Sequence

import numpy as np

from taumodels.base_model import PartialKey, TauModel, Times


class LinearGauge(TauModel):
    """
    Wrap a tau model with an exponential of a linear form in z and the flows.

    Args:
        base: Model being gauged
        ell: Coefficients of the linear form in z
        flow_rates: Coefficients c_a of the flow variables
        const: Constant term
    """

    def __init__(
        self,
        base: TauModel,
        ell: Sequence[complex],
        flow_rates: Optional[Mapping[str, complex]] = None,
        const: complex = 0.0,
    ):
        super().__init__(base.dim, base.flows, base.fd_step, base.fd_step_second)
        self.base = base
        self.ell = np.atleast_1d(np.asarray(ell, dtype=complex))
        self.flow_rates = {name: complex(c) for name, c in (flow_rates or {}).items()}
        self.const = complex(const)

    @property
    def scale(self) -> float:
        return self.base.scale

    @property
    def lattice_generators(self) -> List[np.ndarray]:
        return self.base.lattice_generators

    def _factor(self, points: np.ndarray, times: Times) -> np.ndarray:
        flow_part = sum(c * times.get(name, 0.0) for name, c in self.flow_rates.items())
        return np.exp(points @ self.ell + flow_part + self.const)

    def _evaluate(self, points: np.ndarray, times: Times) -> np.ndarray:
        return self._factor(points, times) * self.base._evaluate(points, times)

    def _analytic_partial(self, points: np.ndarray, times: Times, key: PartialKey) -> np.ndarray:
        factor = self._factor(points, times)
        values = {sub: self.base.partial(points, times, sub) for sub in _sub_keys(key)}
        if len(key) == 0:
            return factor * values[()]
        if len(key) == 1:
            c = self.flow_rates.get(key[0], 0.0)
            return factor * (c * values[()] + values[key])
        a, b = key
        ca, cb = self.flow_rates.get(a, 0.0), self.flow_rates.get(b, 0.0)
        return factor * (ca * cb * values[()] + ca * values[(b,)] + cb * values[(a,)] + values[key])

    def _analytic_gradient(self, points: np.ndarray, times: Times) -> np.ndarray:
        factor = self._factor(points, times)
        base_values = self.base._evaluate(points, times)
        base_grad = self.base.gradient(points, times)
        return factor[:, None] * (base_grad + self.ell[None, :] * base_values[:, None])


def _sub_keys(key: PartialKey) -> List[PartialKey]:
    keys: List[PartialKey] = [()]
    for flow in dict.fromkeys(key):
        keys.append((flow,))
    if len(key) == 2:
        keys.append(tuple(key))
    return keys
