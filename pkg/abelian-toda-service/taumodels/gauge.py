"""
Gauge factors for tau functions.

A QuadraticForm is a polynomial of degree two in the flow variables; tau
models multiply by exp(Q(times)). LinearGauge multiplies a whole model by
exp(l . z + sum_a c_a t_a), which changes the constants of the secancy
identity but not whether it holds.
"""

from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

Times = Mapping[str, complex]


class QuadraticForm:
    """
    Q(t) = sum_{(a,b)} q_ab t_a t_b + sum_a l_a t_a + const.

    Args:
        coefficients: Map from flow-name pairs to q_ab
        linear: Map from flow names to l_a
        const: Constant term
    """

    def __init__(
        self,
        coefficients: Optional[Mapping[Tuple[str, str], complex]] = None,
        linear: Optional[Mapping[str, complex]] = None,
        const: complex = 0.0,
    ):
        self.coefficients: Dict[Tuple[str, str], complex] = {
            tuple(pair): complex(value) for pair, value in (coefficients or {}).items()
        }
        self.linear: Dict[str, complex] = {name: complex(value) for name, value in (linear or {}).items()}
        self.const = complex(const)

    @property
    def is_trivial(self) -> bool:
        return not self.coefficients and not self.linear and self.const == 0

    def value(self, times: Times) -> complex:
        total = self.const
        for (a, b), q in self.coefficients.items():
            total += q * times.get(a, 0.0) * times.get(b, 0.0)
        for a, lin in self.linear.items():
            total += lin * times.get(a, 0.0)
        return complex(total)

    def first(self, times: Times, flow: str) -> complex:
        """dQ/dt_flow."""
        total = self.linear.get(flow, 0.0)
        for (a, b), q in self.coefficients.items():
            if a == flow:
                total += q * times.get(b, 0.0)
            if b == flow:
                total += q * times.get(a, 0.0)
        return complex(total)

    def second(self, flow_a: str, flow_b: str) -> complex:
        """d^2 Q / dt_a dt_b (constant)."""
        total = 0.0 + 0.0j
        for (a, b), q in self.coefficients.items():
            if (a, b) == (flow_a, flow_b):
                total += q
            if (b, a) == (flow_a, flow_b):
                total += q
        return total

    def __repr__(self) -> str:
        return f"QuadraticForm(coefficients={self.coefficients}, linear={self.linear}, const={self.const})"


def gauge_partials(
    gauge: QuadraticForm,
    times: Times,
    key: Sequence[str],
    base: Mapping[Tuple[str, ...], np.ndarray],
) -> np.ndarray:
    """
    Partials of exp(Q) * f given partials of f.

    Args:
        gauge: The quadratic form Q
        times: Flow values
        key: Requested flow derivative, length 0..2
        base: Partials of f keyed by () and the sub-keys of key
    """
    factor = np.exp(gauge.value(times))
    if len(key) == 0:
        return factor * base[()]
    if len(key) == 1:
        (a,) = key
        return factor * (gauge.first(times, a) * base[()] + base[(a,)])
    a, b = key
    qa = gauge.first(times, a)
    qb = gauge.first(times, b)
    return factor * (
        (gauge.second(a, b) + qa * qb) * base[()] + qa * base[(b,)] + qb * base[(a,)] + base[(a, b)]
    )
