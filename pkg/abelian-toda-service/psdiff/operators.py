"""
Pseudo-difference operators on a window of sites.

A = sum_j a_j(n) T^j acts by (A f)(n) = sum_j a_j(n) f(n + j). Coefficients
are stored as complex arrays over a common window [lo, hi]. Operators built
from truncated series carry a floor: powers below it are unknown and every
operation drops what it can no longer vouch for, exactly as Jet does for
powers of k. A floor of None marks a finite operator known exactly.
"""

import logging
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

from exceptions import NormalizationError, WindowUnderflowError
from psdiff.sites import SiteSequence

logger = logging.getLogger(__name__)

Scalar = Union[int, float, complex]


class PsDiffOperator:
    """
    sum_j coeffs[j] T^j with coefficients given on the sites lo..hi.

    Args:
        lo: First site of the window
        hi: Last site of the window
        coeffs: Map from shift power to an array of hi - lo + 1 values
        floor: Lowest reliable power (None for an exact finite operator)
    """

    def __init__(self, lo: int, hi: int, coeffs: Mapping[int, Any], floor: Optional[int] = None):
        if hi < lo:
            raise WindowUnderflowError(lo, (lo, hi))
        self.lo, self.hi = int(lo), int(hi)
        self.floor = None if floor is None else int(floor)
        size = self.hi - self.lo + 1
        self.coeffs: Dict[int, np.ndarray] = {}
        for power, values in coeffs.items():
            if self.floor is not None and power < self.floor:
                continue
            array = np.broadcast_to(np.asarray(values, dtype=complex), (size,)).copy()
            array.setflags(write=False)
            self.coeffs[int(power)] = array

    @classmethod
    def identity(cls, lo: int, hi: int) -> "PsDiffOperator":
        return cls(lo, hi, {0: 1.0})

    @classmethod
    def shift(cls, lo: int, hi: int, power: int = 1) -> "PsDiffOperator":
        return cls(lo, hi, {power: 1.0})

    @classmethod
    def multiplication(cls, values: SiteSequence) -> "PsDiffOperator":
        return cls(values.lo, values.hi, {0: values.to_array()})

    @property
    def window(self) -> Tuple[int, int]:
        return self.lo, self.hi

    @property
    def top(self) -> Optional[int]:
        return max(self.coeffs) if self.coeffs else None

    @property
    def bottom(self) -> Optional[int]:
        return min(self.coeffs) if self.coeffs else None

    @property
    def exact(self) -> bool:
        return self.floor is None

    def _slice(self, array: np.ndarray, lo: int, hi: int) -> np.ndarray:
        return array[lo - self.lo : hi - self.lo + 1]

    def coefficient(self, power: int) -> SiteSequence:
        """Coefficient of T^power as a site sequence."""
        if self.floor is not None and power < self.floor:
            raise ValueError(f"T^{power} lies below the floor T^{self.floor}")
        values = self.coeffs.get(power)
        if values is None:
            values = np.zeros(self.hi - self.lo + 1, dtype=complex)
        return SiteSequence.from_array(self.lo, values)

    def residue(self, q: int = 0) -> SiteSequence:
        """Coefficient of T^-q; q = 0 is res_T, q = 1 is res_T(A T)."""
        return self.coefficient(-q)

    def restrict(self, lo: int, hi: int) -> "PsDiffOperator":
        if lo < self.lo or hi > self.hi:
            raise WindowUnderflowError(lo if lo < self.lo else hi, self.window)
        return PsDiffOperator(lo, hi, {p: self._slice(a, lo, hi) for p, a in self.coeffs.items()}, self.floor)

    def with_coefficient(self, power: int, values) -> "PsDiffOperator":
        coeffs = dict(self.coeffs)
        coeffs[power] = values
        return PsDiffOperator(self.lo, self.hi, coeffs, self.floor)

    def truncate(self, floor: int) -> "PsDiffOperator":
        floor = floor if self.floor is None else max(floor, self.floor)
        return PsDiffOperator(self.lo, self.hi, self.coeffs, floor)

    def _common_window(self, other: "PsDiffOperator") -> Tuple[int, int]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise WindowUnderflowError(lo, self.window)
        return lo, hi

    @staticmethod
    def _join_floor(*floors: Optional[int]) -> Optional[int]:
        known = [f for f in floors if f is not None]
        return max(known) if known else None

    def __add__(self, other: "PsDiffOperator") -> "PsDiffOperator":
        lo, hi = self._common_window(other)
        coeffs: Dict[int, np.ndarray] = {}
        for op in (self, other):
            for power, values in op.coeffs.items():
                part = op._slice(values, lo, hi)
                coeffs[power] = coeffs[power] + part if power in coeffs else part
        return PsDiffOperator(lo, hi, coeffs, self._join_floor(self.floor, other.floor))

    def __neg__(self) -> "PsDiffOperator":
        return PsDiffOperator(self.lo, self.hi, {p: -a for p, a in self.coeffs.items()}, self.floor)

    def __sub__(self, other: "PsDiffOperator") -> "PsDiffOperator":
        return self + (-other)

    def __mul__(self, alpha: Scalar) -> "PsDiffOperator":
        return PsDiffOperator(self.lo, self.hi, {p: a * complex(alpha) for p, a in self.coeffs.items()}, self.floor)

    __rmul__ = __mul__

    def compose(self, other: "PsDiffOperator") -> "PsDiffOperator":
        """
        The product self * other: sum a_i(n) b_j(n + i) T^(i + j).

        Raises:
            WindowUnderflowError: If no site has all the shifted neighbours it needs
        """
        if not self.coeffs or not other.coeffs:
            lo, hi = self._common_window(other)
            return PsDiffOperator(lo, hi, {}, self._join_floor(self.floor, other.floor))
        lo = max(self.lo, other.lo - self.bottom)
        hi = min(self.hi, other.hi - self.top)
        if lo > hi:
            raise WindowUnderflowError(lo, other.window)
        floors = []
        if other.floor is not None:
            floors.append(self.top + other.floor)
        if self.floor is not None:
            floors.append(other.top + self.floor)
        floor = max(floors) if floors else None
        coeffs: Dict[int, np.ndarray] = {}
        for i, a in self.coeffs.items():
            left = self._slice(a, lo, hi)
            for j, b in other.coeffs.items():
                power = i + j
                if floor is not None and power < floor:
                    continue
                term = left * other._slice(b, lo + i, hi + i)
                coeffs[power] = coeffs[power] + term if power in coeffs else term
        return PsDiffOperator(lo, hi, coeffs, floor)

    __matmul__ = compose

    def power(self, m: int) -> "PsDiffOperator":
        if m < 0:
            raise ValueError(f"Only non-negative powers, got {m}")
        result = PsDiffOperator.identity(self.lo, self.hi)
        for _ in range(m):
            result = result.compose(self)
        return result

    def commutator(self, other: "PsDiffOperator") -> "PsDiffOperator":
        return self.compose(other) - other.compose(self)

    def plus(self) -> "PsDiffOperator":
        """Strictly positive part sum_{j >= 1} a_j T^j, an exact operator."""
        if self.floor is not None and self.floor > 1:
            raise ValueError(f"Positive part unknown below T^{self.floor}")
        return PsDiffOperator(self.lo, self.hi, {p: a for p, a in self.coeffs.items() if p >= 1})

    def minus(self) -> "PsDiffOperator":
        """Part sum_{j <= 0} a_j T^j, keeping the floor."""
        return PsDiffOperator(self.lo, self.hi, {p: a for p, a in self.coeffs.items() if p <= 0}, self.floor)

    def split_plus_minus(self) -> Tuple["PsDiffOperator", "PsDiffOperator"]:
        return self.plus(), self.minus()

    def adjoint(self) -> "PsDiffOperator":
        """
        Formal adjoint sum_j a_j(n - j) T^-j of an exact operator.

        Raises:
            ValueError: If the operator is a truncated series
        """
        if not self.exact:
            raise ValueError("The adjoint of a truncated series is not determined")
        if not self.coeffs:
            return self
        lo, hi = self.lo + max(self.top, 0), self.hi + min(self.bottom, 0)
        if lo > hi:
            raise WindowUnderflowError(lo, self.window)
        return PsDiffOperator(lo, hi, {-j: self._slice(a, lo - j, hi - j) for j, a in self.coeffs.items()})

    def inverse(self, depth: Optional[int] = None) -> "PsDiffOperator":
        """
        Inverse of sum_{s >= 0} a_s T^-s through T^-depth.

        chi_0 = 1 / a_0 and chi_s(n) = -(1 / a_0(n)) sum_{i=1..s} a_i(n) chi_{s-i}(n - i);
        the result lives on [lo + depth, hi].

        Raises:
            ValueError: If the operator has positive powers or no depth is known
            NormalizationError: If a_0 vanishes at some site
        """
        if self.top is not None and self.top > 0:
            raise ValueError("Only operators sum_{s >= 0} a_s T^-s can be inverted")
        if depth is None:
            if self.floor is None:
                raise ValueError("An exact operator needs an explicit inversion depth")
            depth = -self.floor
        if self.floor is not None and -self.floor < depth:
            raise ValueError(f"Inversion depth {depth} below the floor T^{self.floor}")
        size = self.hi - self.lo + 1
        if size <= depth:
            raise WindowUnderflowError(self.lo + depth, self.window)
        a = [self.coeffs.get(-s, np.zeros(size, dtype=complex)) for s in range(depth + 1)]
        if np.any(np.abs(a[0]) == 0):
            raise NormalizationError("Leading coefficient vanishes; the operator is not invertible")
        chi = [1.0 / a[0]]
        for s in range(1, depth + 1):
            acc = np.zeros(size - s, dtype=complex)
            for i in range(1, s + 1):
                acc += a[i][s:] * chi[s - i][s - i : size - i]
            full = np.full(size, np.nan, dtype=complex)
            full[s:] = -acc / a[0][s:]
            chi.append(full)
        return PsDiffOperator(self.lo + depth, self.hi, {-s: chi[s][depth:] for s in range(depth + 1)}, -depth)

    def apply(self, values: SiteSequence) -> SiteSequence:
        """(A f)(n) = sum_j a_j(n) f(n + j) on every site where all neighbours exist."""
        if not self.coeffs:
            raise ValueError("Applying the zero operator")
        lo = max(self.lo, values.lo - self.bottom)
        hi = min(self.hi, values.hi - self.top)
        if lo > hi:
            raise WindowUnderflowError(lo, values.window)
        out = []
        for n in range(lo, hi + 1):
            total = None
            for j, a in self.coeffs.items():
                term = complex(a[n - self.lo]) * values[n + j]
                total = term if total is None else total + term
            out.append(total)
        return SiteSequence(lo, out)

    def left_apply(self, values: SiteSequence) -> SiteSequence:
        """Right action on a row vector: (g A)(n) = sum_j g(n - j) a_j(n - j)."""
        if not self.coeffs:
            raise ValueError("Applying the zero operator")
        lo = max(values.lo, self.lo) + max(self.top, 0)
        hi = min(values.hi, self.hi) + min(self.bottom, 0)
        if lo > hi:
            raise WindowUnderflowError(lo, values.window)
        out = []
        for n in range(lo, hi + 1):
            total = None
            for j, a in self.coeffs.items():
                term = complex(a[n - j - self.lo]) * values[n - j]
                total = term if total is None else total + term
            out.append(total)
        return SiteSequence(lo, out)

    def max_abs(self) -> float:
        """Largest coefficient magnitude over all stored powers and sites."""
        if not self.coeffs:
            return 0.0
        return float(max(np.max(np.abs(a)) for a in self.coeffs.values()))

    def distance(self, other: "PsDiffOperator") -> float:
        """max |a_j(n) - b_j(n)| over common sites and powers both vouch for."""
        difference = self - other
        return difference.max_abs()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "window": [self.lo, self.hi],
            "floor": self.floor,
            "coefficients": {
                str(p): {"re": a.real.tolist(), "im": a.imag.tolist()} for p, a in sorted(self.coeffs.items())
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PsDiffOperator":
        lo, hi = data["window"]
        coeffs = {
            int(p): np.asarray(v["re"], dtype=float) + 1j * np.asarray(v["im"], dtype=float)
            for p, v in data["coefficients"].items()
        }
        return cls(lo, hi, coeffs, data.get("floor"))

    def to_frame(self) -> pd.DataFrame:
        """Long table with one row per (power, site)."""
        sites = np.arange(self.lo, self.hi + 1)
        frames = [
            pd.DataFrame({"power": p, "site": sites, "re": a.real, "im": a.imag})
            for p, a in sorted(self.coeffs.items(), reverse=True)
        ]
        if not frames:
            return pd.DataFrame(columns=["power", "site", "re", "im"])
        return pd.concat(frames, ignore_index=True)

    def __repr__(self) -> str:
        powers = f"{self.bottom}..{self.top}" if self.coeffs else "none"
        return f"PsDiffOperator(window=[{self.lo}, {self.hi}], powers={powers}, floor={self.floor})"


def op_algebra(a: PsDiffOperator, b: Optional[PsDiffOperator] = None, op: str = "compose", m: int = 1):
    """
    Dispatch one operator-algebra operation by name.

    Args:
        a: First operand
        b: Second operand (compose and commutator)
        op: compose, commutator, power, split_plus_minus, res_T, res_T1 or adjoint
        m: Exponent for power

    Returns:
        PsDiffOperator, a (plus, minus) pair, or a SiteSequence for the residues
    """
    if op in ("compose", "commutator"):
        if b is None:
            raise ValueError(f"{op} needs two operands")
        return a.compose(b) if op == "compose" else a.commutator(b)
    if op == "power":
        return a.power(m)
    if op == "split_plus_minus":
        return a.split_plus_minus()
    if op == "res_T":
        return a.residue(0)
    if op == "res_T1":
        return a.residue(1)
    if op == "adjoint":
        return a.adjoint()
    raise ValueError(f"Unknown operator operation {op!r}")
