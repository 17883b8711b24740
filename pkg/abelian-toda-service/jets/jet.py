"""
Truncated formal series in the spectral parameter.

A Jet stores c_0..c_S as the coefficients of k^lead, k^(lead-1), ...,
k^(lead-S). Everything below k^(lead-S) is unknown, so every operation keeps
track of the lowest power it can still vouch for and never extends it.
"""

import logging
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np

from exceptions import SingularJetError

logger = logging.getLogger(__name__)

Scalar = Union[int, float, complex]


class Jet:
    """
    Truncated series sum_s coeffs[s] k^(lead - s), s = 0..S.

    Args:
        lead: Power of k of the leading coefficient
        coeffs: Coefficients c_0..c_S
    """

    __slots__ = ("_lead", "_coeffs")

    def __init__(self, lead: int, coeffs: Sequence[Scalar]):
        values = np.array(coeffs, dtype=complex).ravel()
        if values.size == 0:
            raise ValueError("Jet needs at least one coefficient")
        values.setflags(write=False)
        self._lead = int(lead)
        self._coeffs = values

    @classmethod
    def constant(cls, value: Scalar, depth: int) -> "Jet":
        return cls(0, [value] + [0.0] * depth)

    @classmethod
    def monomial(cls, power: int, depth: int, value: Scalar = 1.0) -> "Jet":
        return cls(power, [value] + [0.0] * depth)

    @property
    def lead(self) -> int:
        return self._lead

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def depth(self) -> int:
        return self._coeffs.size - 1

    @property
    def floor(self) -> int:
        """Lowest power of k carried by the jet."""
        return self._lead - self.depth

    @property
    def is_wave_normalized(self) -> bool:
        return self._coeffs[0] != 0

    def coefficient(self, power: int) -> complex:
        """Coefficient of k^power; zero above the lead, error below the floor."""
        if power > self._lead:
            return 0j
        if power < self.floor:
            raise ValueError(f"Power {power} below jet floor {self.floor}")
        return complex(self._coeffs[self._lead - power])

    def powers_array(self, top: int, bottom: int) -> np.ndarray:
        """Coefficients for powers top, top-1, ..., bottom (zero-padded above the lead)."""
        return np.array([self.coefficient(p) for p in range(top, bottom - 1, -1)])

    def truncate(self, floor: int) -> "Jet":
        """Drop powers below the given floor."""
        if floor < self.floor:
            raise ValueError(f"Cannot extend jet floor {self.floor} down to {floor}")
        if floor > self._lead:
            return Jet(floor, [0.0])
        return Jet(self._lead, self._coeffs[: self._lead - floor + 1])

    def evaluate(self, k: Scalar) -> complex:
        powers = np.asarray(k, dtype=complex) ** (self._lead - np.arange(self._coeffs.size))
        return complex(np.sum(self._coeffs * powers))

    def max_abs_difference(self, other: "Jet") -> float:
        """Largest coefficient difference over the common range of powers."""
        top = max(self._lead, other._lead)
        bottom = max(self.floor, other.floor)
        if bottom > top:
            return 0.0
        return float(np.max(np.abs(self.powers_array(top, bottom) - other.powers_array(top, bottom))))

    def __add__(self, other: Union["Jet", Scalar]) -> "Jet":
        other = _coerce(other, self)
        top = max(self._lead, other._lead)
        bottom = max(self.floor, other.floor)
        return Jet(top, self.powers_array(top, bottom) + other.powers_array(top, bottom))

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self._lead, -self._coeffs)

    def __sub__(self, other: Union["Jet", Scalar]) -> "Jet":
        return self + (-_coerce(other, self))

    def __rsub__(self, other: Scalar) -> "Jet":
        return _coerce(other, self) - self

    def __mul__(self, other: Union["Jet", Scalar]) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self._lead, self._coeffs * complex(other))
        lead = self._lead + other._lead
        floor = max(self._lead + other.floor, other._lead + self.floor)
        count = lead - floor + 1
        product = np.convolve(self._coeffs, other._coeffs)[:count]
        return Jet(lead, product)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["Jet", Scalar]) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self._lead, self._coeffs / complex(other))
        return self * other.inverse()

    def inverse(self) -> "Jet":
        """Series inverse; same depth, lead negated."""
        a = self._coeffs
        if a[0] == 0:
            raise SingularJetError("Cannot invert a jet with zero leading coefficient")
        b = np.zeros_like(a)
        b[0] = 1.0 / a[0]
        for n in range(1, a.size):
            b[n] = -np.dot(a[1 : n + 1], b[n - 1 :: -1][:n]) / a[0]
        return Jet(-self._lead, b)

    def scale_shift(self, alpha: Scalar, power: int) -> "Jet":
        """Multiply by alpha k^power."""
        return Jet(self._lead + power, self._coeffs * complex(alpha))

    def exp(self) -> "Jet":
        """Exponential of a jet whose lead is at most zero."""
        if self._lead > 0:
            raise ValueError(f"exp needs lead power <= 0, got {self._lead}")
        h = self.powers_array(0, self.floor)
        f = np.zeros_like(h)
        f[0] = np.exp(h[0])
        for n in range(1, h.size):
            j = np.arange(1, n + 1)
            f[n] = np.sum(j * h[1 : n + 1] * f[n - 1 :: -1][:n]) / n
        return Jet(0, f)

    def log(self) -> "Jet":
        """Principal logarithm of a jet with lead zero and nonzero c_0."""
        if self._lead != 0:
            raise ValueError(f"log needs lead power 0, got {self._lead}")
        j = self._coeffs
        if j[0] == 0:
            raise SingularJetError("Cannot take the logarithm of a jet with zero leading coefficient")
        g = np.zeros_like(j)
        g[0] = np.log(j[0])
        for n in range(1, j.size):
            i = np.arange(1, n)
            g[n] = (n * j[n] - np.sum(i * g[1:n] * j[n - 1 : 0 : -1][: n - 1])) / (n * j[0])
        return Jet(0, g)

    def to_dict(self) -> Dict[str, Any]:
        return {"lead": self._lead, "coeffs": [[c.real, c.imag] for c in self._coeffs]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Jet":
        return cls(data["lead"], [complex(re, im) for re, im in data["coeffs"]])

    def __repr__(self) -> str:
        return f"Jet(lead={self._lead}, coeffs={np.round(self._coeffs, 12).tolist()})"


def _coerce(value: Union[Jet, Scalar], like: Jet) -> Jet:
    if isinstance(value, Jet):
        return value
    return Jet.constant(value, max(0, -like.floor))


def jet_arith(
    a: Jet,
    b: Optional[Jet] = None,
    op: str = "add",
    alpha: Scalar = 1.0,
    power: int = 0,
) -> Jet:
    """
    Dispatch one jet operation by name.

    Args:
        a: First operand
        b: Second operand for add, mul and div
        op: One of add, mul, div, exp, log, scale_shift
        alpha: Scale factor for scale_shift
        power: Power of k for scale_shift

    Returns:
        Resulting jet, truncated to the common depth

    Raises:
        SingularJetError: Zero leading coefficient in div or log
    """
    if op in ("add", "mul", "div") and b is None:
        raise ValueError(f"Operation {op} needs two operands")
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "exp":
        return a.exp()
    if op == "log":
        return a.log()
    if op == "scale_shift":
        return a.scale_shift(alpha, power)
    raise ValueError(f"Unknown jet operation: {op}")
