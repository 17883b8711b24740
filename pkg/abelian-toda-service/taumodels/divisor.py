"""
Zero finding for tau functions restricted to a complex line.

Zeros of s -> tau(z0 + s w) inside a rectangle are counted with the argument
principle on adaptively sampled boundaries, isolated by quadrant subdivision
and polished by (multiplicity-aware) Newton iteration.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from exceptions import ContourError, RefinementError
from taumodels.base_model import TauModel, Times

logger = logging.getLogger(__name__)

MAX_PHASE_STEP = np.pi / 4
ON_CONTOUR = 1e-9
PERTURBATION_RETRIES = 3


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in the line parameter s."""

    lo: complex
    hi: complex

    @property
    def size(self) -> float:
        return max(self.hi.real - self.lo.real, self.hi.imag - self.lo.imag)

    @property
    def center(self) -> complex:
        return 0.5 * (self.lo + self.hi)

    def contains(self, s: complex, margin: float = 0.0) -> bool:
        pad = margin * self.size
        return (
            self.lo.real - pad <= s.real <= self.hi.real + pad and self.lo.imag - pad <= s.imag <= self.hi.imag + pad
        )

    def corners(self) -> List[complex]:
        return [self.lo, complex(self.hi.real, self.lo.imag), self.hi, complex(self.lo.real, self.hi.imag)]

    def split(self, offset: complex = 0j) -> List["Box"]:
        mid = self.center + offset
        return [
            Box(self.lo, mid),
            Box(complex(mid.real, self.lo.imag), complex(self.hi.real, mid.imag)),
            Box(mid, self.hi),
            Box(complex(self.lo.real, mid.imag), complex(mid.real, self.hi.imag)),
        ]

    def __str__(self) -> str:
        return f"[{self.lo:.6g}, {self.hi:.6g}]"


@dataclass
class DivisorZeros:
    """Zeros found on a line, sorted by real then imaginary part."""

    parameters: np.ndarray
    multiplicities: List[int]
    winding: int
    residuals: List[float] = field(default_factory=list)

    def points(self, z0: Sequence[complex], w: Sequence[complex]) -> np.ndarray:
        z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        return z0[None, :] + self.parameters[:, None] * w[None, :]


class _OnContour(Exception):
    pass


class _LineFunction:
    """tau restricted to z0 + s w, with its s-derivative."""

    def __init__(self, model: TauModel, z0, w, times: Times):
        self.model = model
        self.z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
        self.w = np.atleast_1d(np.asarray(w, dtype=complex))
        self.times = times

    def points(self, s: np.ndarray) -> np.ndarray:
        return self.z0[None, :] + np.asarray(s, dtype=complex)[:, None] * self.w[None, :]

    def __call__(self, s: np.ndarray) -> np.ndarray:
        return self.model.evaluate(self.points(np.atleast_1d(s)), self.times)

    def derivative(self, s: np.ndarray) -> np.ndarray:
        grad = self.model.gradient(self.points(np.atleast_1d(s)), self.times)
        return grad @ self.w


def _winding(f: _LineFunction, box: Box, per_side: int = 16, max_rounds: int = 25) -> Tuple[int, float]:
    """
    Argument-principle zero count on the boundary of a box.

    Returns:
        (winding number, largest |f| seen on the boundary)
    """
    corners = box.corners()
    ts = np.linspace(0.0, 1.0, per_side, endpoint=False)
    samples = np.concatenate([corners[k] + ts * (corners[(k + 1) % 4] - corners[k]) for k in range(4)])
    values = f(samples)

    for _ in range(max_rounds):
        peak = float(np.max(np.abs(values)))
        if np.min(np.abs(values)) < ON_CONTOUR * peak:
            raise _OnContour()
        following = np.roll(values, -1)
        steps = np.angle(following / values)
        coarse = np.nonzero(np.abs(steps) > MAX_PHASE_STEP)[0]
        if coarse.size == 0:
            winding = steps.sum() / (2 * np.pi)
            count = int(round(winding))
            if abs(winding - count) > 1e-6:
                raise ContourError(f"Non-integer winding {winding:.6f} on box {box}")
            return count, peak
        next_samples = np.roll(samples, -1)
        midpoints = 0.5 * (samples[coarse] + next_samples[coarse])
        mid_values = f(midpoints)
        samples = np.insert(samples, coarse + 1, midpoints)
        values = np.insert(values, coarse + 1, mid_values)
    raise _OnContour()


def _newton(f: _LineFunction, box: Box, multiplicity: int, scale: float, max_iter: int = 60) -> Tuple[complex, float]:
    s = box.center
    value = complex(f(np.array([s]))[0])
    for _ in range(max_iter):
        slope = complex(f.derivative(np.array([s]))[0])
        if slope == 0:
            break
        step = multiplicity * value / slope
        s = s - step
        value = complex(f(np.array([s]))[0])
        if abs(value) < 1e-12 * scale or abs(step) < 1e-15 * max(abs(s), box.size, 1.0):
            break
    if not box.contains(s, margin=0.05) or not np.isfinite(s):
        raise RefinementError(box)
    return s, abs(value)


def divisor_zeros(
    model: TauModel,
    line: Tuple[Sequence[complex], Sequence[complex]],
    times: Optional[Times] = None,
    cell: Tuple[complex, complex] = (-0.5 - 0.5j, 0.5 + 0.5j),
    min_size_ratio: float = 1e-6,
    rng: Optional[np.random.Generator] = None,
) -> DivisorZeros:
    """
    All zeros of s -> tau(z0 + s w) inside a rectangle.

    Args:
        model: Tau model
        line: (z0, w) with w nonzero
        times: Flow values
        cell: Lower-left and upper-right corners of the search rectangle in s
        min_size_ratio: Smallest box, relative to the cell, before a cluster
            is treated as one multiple zero
        rng: Generator for contour perturbations

    Returns:
        DivisorZeros with multiplicities summing to the winding number

    Raises:
        ContourError: If a zero stays on a contour after the perturbation retries
        RefinementError: If Newton iteration fails in a box at the smallest size
    """
    z0, w = line
    if np.allclose(np.asarray(w, dtype=complex), 0):
        raise ValueError("Line direction w must be nonzero")
    rng = rng or np.random.default_rng(0)
    f = _LineFunction(model, z0, w, times or {})
    root = Box(complex(cell[0]), complex(cell[1]))

    total, scale = None, 1.0
    for attempt in range(PERTURBATION_RETRIES + 1):
        try:
            total, scale = _winding(f, root)
            break
        except _OnContour:
            pad = 1e-3 * root.size * (rng.uniform(0.5, 1.5) + 1j * rng.uniform(0.5, 1.5))
            logger.warning(f"Zero on search contour {root}; perturbing (attempt {attempt + 1})")
            root = Box(root.lo - pad, root.hi + pad)
    if total is None:
        raise ContourError(f"Zero on contour of {root} after {PERTURBATION_RETRIES} perturbations")

    min_size = min_size_ratio * root.size
    found: List[Tuple[complex, int, float]] = []
    stack: List[Tuple[Box, int, float]] = [(root, total, scale)]
    while stack:
        box, count, local = stack.pop()
        if count == 0:
            continue
        if count == 1 or box.size < min_size:
            try:
                s, residual = _newton(f, box, count, local)
                found.append((s, count, residual))
                continue
            except RefinementError:
                if box.size < min_size:
                    raise
        children = _split_counted(f, box, count, rng)
        stack.extend(children)

    found.sort(key=lambda item: (round(item[0].real, 10), round(item[0].imag, 10)))
    result = DivisorZeros(
        parameters=np.array([item[0] for item in found], dtype=complex),
        multiplicities=[item[1] for item in found],
        winding=total,
        residuals=[item[2] for item in found],
    )
    logger.debug(f"divisor_zeros: winding {total}, zeros {result.parameters.tolist()}")
    return result


def _split_counted(f: _LineFunction, box: Box, count: int, rng: np.random.Generator) -> List[Tuple[Box, int, float]]:
    offset = 0j
    for attempt in range(PERTURBATION_RETRIES + 1):
        try:
            children = box.split(offset)
            counted = [(child, *_winding(f, child)) for child in children]
            if sum(c for _, c, _ in counted) == count:
                return counted
            logger.debug(f"Subdivision of {box} lost zeros; retrying")
        except _OnContour:
            logger.debug(f"Zero on subdivision contour of {box}; retrying")
        offset = 0.05 * box.size * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
    raise ContourError(f"Could not subdivide box {box} without a zero on a contour")
