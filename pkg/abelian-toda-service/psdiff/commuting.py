"""
Linear dependence of the residue family and the commuting operators it yields.

Continuous: the coefficients F^1_m of T^-1 in L^m span a finite-dimensional
space; a basis A is picked greedily by numerical rank, every other F^1_i is
fitted as sum_A c_{i,a} F^1_a plus a z-independent term at each t-node (the
forward difference kills that term), and the fitted constants must not depend
on t. Discrete: the same with F_i (the T^0 coefficients) taken
modulo z-independent sequences, the constants fitted per level nu.
Then L_i = L^i_+ - sum_A c_{i,a} L^a_+ satisfies L_i psi = a_i(k) psi with
a_i(k) = k^i + sum_s a_{s,i} k^(i-s), and the L_i commute.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg

from exceptions import InconclusiveRankError, TimeDependentConstantsError
from jets.jet import Jet
from psdiff.dressing import continuous_waves, discrete_waves, dress, eigen_jets, wave_window
from psdiff.operators import PsDiffOperator
from residuals.report import ResidualReport

logger = logging.getLogger(__name__)

RANK_THRESHOLD = 1e-8
RANK_GAP = 10.0
CONSTANCY_TOLERANCE = 1e-7
DEFAULT_MAX_POWER = 3


@dataclass
class DependencyFit:
    """Basis of the residue family and the constants of the dependent members."""

    powers: List[int]
    basis: List[int]
    constants: Dict[int, np.ndarray]
    per_node: Dict[int, np.ndarray]
    variation: float
    fit_residual: float
    spectra: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def dependent(self) -> List[int]:
        return sorted(self.constants)


@dataclass
class CommutingRing:
    """Operators L_i, their eigen-jets a_i(k) and the consistency report."""

    fit: DependencyFit
    operators: Dict[int, PsDiffOperator]
    eigenvalues: Dict[int, Jet]
    report: ResidualReport


def numerical_rank(
    matrix: np.ndarray, threshold: float = RANK_THRESHOLD, gap: float = RANK_GAP
) -> Tuple[int, np.ndarray]:
    """
    Rank of a sample matrix with unit-normalized columns.

    Columns far below the largest one count as zero. Singular values above
    threshold * sigma_max count toward the rank; none may lie within a factor
    `gap` of that cut.

    Returns:
        (rank, singular values)

    Raises:
        InconclusiveRankError: If the spectrum has no clear gap at the threshold
    """
    matrix = np.asarray(matrix, dtype=complex)
    norms = np.linalg.norm(matrix, axis=0)
    if not matrix.size or np.max(norms, initial=0.0) == 0:
        return 0, np.zeros(min(matrix.shape) if matrix.size else 0)
    zero = norms < threshold * np.max(norms)
    scaled = matrix / np.where(zero, 1.0, norms)
    scaled[:, zero] = 0
    spectrum = linalg.svdvals(scaled)
    cut = threshold * spectrum[0]
    if np.any((spectrum > cut / gap) & (spectrum < cut * gap)):
        raise InconclusiveRankError(spectrum.tolist())
    return int(np.sum(spectrum > cut)), spectrum


def _design(columns: Sequence[np.ndarray], rows: int, modulo_constants: bool) -> np.ndarray:
    parts = ([np.ones(rows, dtype=complex)] if modulo_constants else []) + list(columns)
    return np.column_stack(parts) if parts else np.zeros((rows, 0), dtype=complex)


def select_basis(
    samples: np.ndarray, powers: Sequence[int], modulo_constants: bool = False
) -> Tuple[List[int], List[int], Dict[int, np.ndarray]]:
    """
    Greedy basis of the columns of a (points, powers) sample array.

    Returns:
        (basis powers, dependent powers, singular values of each test)
    """
    samples = np.asarray(samples, dtype=complex)
    rows = samples.shape[0]
    basis: List[int] = []
    dependent: List[int] = []
    spectra: Dict[int, np.ndarray] = {}
    for index, m in enumerate(powers):
        kept = [samples[:, powers.index(a)] for a in basis]
        design = _design(kept + [samples[:, index]], rows, modulo_constants)
        rank, spectra[m] = numerical_rank(design)
        if rank == design.shape[1]:
            basis.append(m)
        else:
            dependent.append(m)
    logger.debug(f"Residue family basis {basis}, dependent {dependent}")
    return basis, dependent, spectra


def fit_dependency(
    samples: np.ndarray,
    powers: Sequence[int],
    modulo_constants: bool = False,
    tolerance: float = CONSTANCY_TOLERANCE,
) -> DependencyFit:
    """
    Basis at the first node and constants c_{i,a} fitted at every node.

    Args:
        samples: Array (nodes, points, powers) of the residue family
        powers: Powers labelling the last axis
        modulo_constants: Allow an additive z-independent term per node
        tolerance: Largest admissible change of a constant across nodes

    Raises:
        InconclusiveRankError: If the basis cannot be decided
        TimeDependentConstantsError: If the constants vary across nodes
    """
    samples = np.asarray(samples, dtype=complex)
    powers = list(powers)
    basis, dependent, spectra = select_basis(samples[0], powers, modulo_constants)
    per_node: Dict[int, np.ndarray] = {}
    fit_residual = 0.0
    for i in dependent:
        rows = []
        for node in samples:
            design = _design([node[:, powers.index(a)] for a in basis], node.shape[0], modulo_constants)
            target = node[:, powers.index(i)]
            if design.shape[1]:
                solution = linalg.lstsq(design, target)[0]
                misfit = np.max(np.abs(design @ solution - target))
            else:
                solution = np.zeros(0, dtype=complex)
                misfit = np.max(np.abs(target), initial=0.0)
            scale = max(1.0, float(np.max(np.abs(target), initial=0.0)))
            fit_residual = max(fit_residual, float(misfit) / scale)
            rows.append(solution[1:] if modulo_constants else solution)
        per_node[i] = np.array(rows).reshape(len(samples), len(basis))
    variation = max((float(np.max(np.abs(c - c[0]), initial=0.0)) for c in per_node.values()), default=0.0)
    logger.info(
        f"Dependency fit: basis {basis}, dependent {dependent}, "
        f"constant variation {variation:.3e}, fit residual {fit_residual:.3e}"
    )
    if variation > tolerance:
        raise TimeDependentConstantsError(variation, tolerance)
    constants = {i: c.mean(axis=0) for i, c in per_node.items()}
    return DependencyFit(powers, basis, constants, per_node, variation, fit_residual, spectra)


def commuting_operators(L: PsDiffOperator, fit: DependencyFit) -> Dict[int, PsDiffOperator]:
    """L_i = L^i_+ - sum_A c_{i,a} L^a_+ for every dependent power i."""
    plus = {m: L.power(m).plus() for m in set(fit.basis) | set(fit.dependent)}
    operators = {}
    for i in fit.dependent:
        operator = plus[i]
        for a, c in zip(fit.basis, fit.constants[i]):
            operator = operator - plus[a] * c
        operators[i] = operator
    return operators


def _ring_report(operators: Dict[int, PsDiffOperator], waves, identity: str) -> Tuple[Dict[int, Jet], ResidualReport]:
    frames, eigenvalues, worst = [], {}, {}
    for i, operator in operators.items():
        jets = eigen_jets(operator, waves)
        reference = jets[jets.lo]
        eigenvalues[i] = reference
        depth = reference.depth
        lhs = np.concatenate([jets[n].coeffs[: depth + 1] for n in jets.sites])
        rhs = np.tile(reference.coeffs[: depth + 1], len(jets))
        sites = np.repeat(np.arange(jets.lo, jets.hi + 1), depth + 1)
        part = ResidualReport.from_scaled_sides(
            identity, lhs, rhs, columns={"relation": "eigen", "i": i, "j": i, "site": sites}
        )
        frames.append(part.table)
        worst[f"eigen_{i}"] = part.max_residual
        worst[f"leading_{i}"] = abs(reference.coefficient(i) - 1)
    for i, j in combinations(sorted(operators), 2):
        left = operators[i].compose(operators[j])
        right = operators[j].compose(operators[i])
        lo, hi = max(left.lo, right.lo), min(left.hi, right.hi)
        powers = sorted(set(left.coeffs) | set(right.coeffs))
        lhs = np.concatenate([left.coefficient(p).restrict(lo, hi).to_array() for p in powers])
        rhs = np.concatenate([right.coefficient(p).restrict(lo, hi).to_array() for p in powers])
        part = ResidualReport.from_scaled_sides(
            identity,
            lhs,
            rhs,
            columns={"relation": "commutator", "i": i, "j": j, "site": np.tile(np.arange(lo, hi + 1), len(powers))},
        )
        frames.append(part.table)
        worst[f"commutator_{i}_{j}"] = part.max_residual
    table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(
        columns=["relation", "i", "j", "site", "lhs", "rhs", "residual", "flagged"]
    )
    return eigenvalues, ResidualReport(identity, table, {"max_by_relation": worst})


def sample_residue_family(
    wave,
    points: Sequence[complex],
    times: Sequence[complex],
    depth: int,
    max_power: int = DEFAULT_MAX_POWER,
    variant: str = "continuous",
) -> np.ndarray:
    """
    Residue family at site 0 of windows starting at every point and node.

    Continuous: F^1_m(z0, t) for z0 in points, t in times. Discrete:
    F_i(base, nu) for base in points and nu in times.

    Returns:
        Array (nodes, points, max_power)
    """
    q = 1 if variant == "continuous" else 0
    lo, hi = wave_window(depth, max_power, margin=0)
    out = np.zeros((len(times), len(points), max_power), dtype=complex)
    for a, t in enumerate(times):
        for b, z0 in enumerate(points):
            if variant == "continuous":
                L = dress(continuous_waves(wave, z0, wave.U, float(t), depth, lo, hi)).L
            else:
                L = dress(discrete_waves(wave, z0, t, 0, depth, lo, hi), "discrete").L
            Lm = L
            for m in range(1, max_power + 1):
                if m > 1:
                    Lm = Lm.compose(L)
                out[a, b, m - 1] = Lm.residue(q)[0]
    return out


def dependency_and_commute(
    wave,
    points: Sequence[complex],
    times: Sequence[complex],
    depth: int,
    max_power: int = DEFAULT_MAX_POWER,
    variant: str = "continuous",
    origin: Optional[complex] = None,
    period: Optional[int] = None,
    tolerance: float = CONSTANCY_TOLERANCE,
) -> CommutingRing:
    """
    Detect the dependence of the residue family and build the commuting operators.

    Args:
        wave: Continuous or discrete wave source
        points: Sample points z0 (or discrete base points), clear of the poles
        times: t-nodes (or nu levels) for the constancy test
        depth: Truncation depth S
        max_power: Largest power m sampled
        variant: continuous or discrete
        origin: Orbit origin for the operator check (default: first point)
        period: Discrete only; compare F_i at nu and nu + period
        tolerance: Constancy tolerance of the fitted constants

    Returns:
        CommutingRing; report 'commuting' holds the eigen-jet and commutator relations
    """
    if variant not in ("continuous", "discrete"):
        raise ValueError(f"Unknown dependency variant {variant!r}")
    if max_power > depth - (1 if variant == "continuous" else 0):
        raise ValueError(f"Power {max_power} needs a depth above {depth}")
    powers = list(range(1, max_power + 1))
    samples = sample_residue_family(wave, points, times, depth, max_power, variant)
    fit = fit_dependency(samples, powers, modulo_constants=True, tolerance=tolerance)

    origin = points[0] if origin is None else origin
    lo, hi = wave_window(depth, max_power, margin=3)
    if variant == "continuous":
        waves = continuous_waves(wave, origin, wave.U, float(times[0]), depth, lo, hi)
        dressing = dress(waves)
    else:
        waves = discrete_waves(wave, origin, times[0], 0, depth, lo, hi)
        dressing = dress(waves, "discrete")
    operators = commuting_operators(dressing.L, fit)
    eigenvalues, report = _ring_report(operators, waves, "commuting")
    report.extra.update(
        {"variant": variant, "basis": fit.basis, "dependent": fit.dependent, "constant_variation": fit.variation}
    )
    if variant == "discrete" and period is not None:
        shifted = sample_residue_family(wave, points, [complex(t) + period for t in times], depth, max_power, variant)
        scale = max(1.0, float(np.max(np.abs(samples))))
        report.extra["periodicity"] = float(np.max(np.abs(shifted - samples))) / scale
    return CommutingRing(fit, operators, eigenvalues, report)
