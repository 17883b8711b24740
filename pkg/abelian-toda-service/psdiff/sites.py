"""
Values on a window of consecutive lattice sites.

A SiteSequence holds f(n) for lo <= n <= hi. The orbit z + nU is infinite,
so every read outside the window raises instead of returning zero.
"""

from typing import Callable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from exceptions import WindowUnderflowError
from jets.jet import Jet

Value = Union[complex, Jet]


class SiteSequence:
    """
    Sequence f(lo), ..., f(hi) of complex numbers or jets.

    Args:
        lo: First site
        values: Values at lo, lo + 1, ...
    """

    __slots__ = ("lo", "_values")

    def __init__(self, lo: int, values: Sequence[Value]):
        values = list(values)
        if not values:
            raise ValueError("SiteSequence needs at least one site")
        self.lo = int(lo)
        self._values: List[Value] = values

    @classmethod
    def from_function(cls, lo: int, hi: int, func: Callable[[int], Value]) -> "SiteSequence":
        return cls(lo, [func(n) for n in range(lo, hi + 1)])

    @classmethod
    def from_array(cls, lo: int, values) -> "SiteSequence":
        return cls(lo, [complex(v) for v in np.asarray(values, dtype=complex).ravel()])

    @property
    def hi(self) -> int:
        return self.lo + len(self._values) - 1

    @property
    def window(self) -> Tuple[int, int]:
        return self.lo, self.hi

    @property
    def sites(self) -> range:
        return range(self.lo, self.hi + 1)

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self) -> Iterator[Value]:
        return iter(self._values)

    def __contains__(self, site: int) -> bool:
        return self.lo <= site <= self.hi

    def __getitem__(self, site: int) -> Value:
        if site not in self:
            raise WindowUnderflowError(site, self.window)
        return self._values[site - self.lo]

    def restrict(self, lo: int, hi: int) -> "SiteSequence":
        for site in (lo, hi):
            if site not in self:
                raise WindowUnderflowError(site, self.window)
        return SiteSequence(lo, self._values[lo - self.lo : hi - self.lo + 1])

    def shifted(self, j: int) -> "SiteSequence":
        """The sequence n -> f(n + j)."""
        return SiteSequence(self.lo - j, self._values)

    def map(self, func: Callable[[Value], Value]) -> "SiteSequence":
        return SiteSequence(self.lo, [func(v) for v in self._values])

    def _common(self, other: "SiteSequence") -> Tuple[int, int]:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise WindowUnderflowError(lo, self.window)
        return lo, hi

    def _combine(self, other, func) -> "SiteSequence":
        if not isinstance(other, SiteSequence):
            return self.map(lambda v: func(v, other))
        lo, hi = self._common(other)
        return SiteSequence(lo, [func(self[n], other[n]) for n in range(lo, hi + 1)])

    def __add__(self, other) -> "SiteSequence":
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other) -> "SiteSequence":
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, other) -> "SiteSequence":
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def difference(self) -> "SiteSequence":
        """Forward difference f(n + 1) - f(n)."""
        return self.shifted(1) - self

    def to_array(self) -> np.ndarray:
        """Complex values as an array; jets are not allowed."""
        if any(isinstance(v, Jet) for v in self._values):
            raise TypeError("to_array needs scalar values")
        return np.asarray(self._values, dtype=complex)

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(v.coeffs))) if isinstance(v, Jet) else abs(v) for v in self._values)

    def __repr__(self) -> str:
        return f"SiteSequence([{self.lo}, {self.hi}])"
