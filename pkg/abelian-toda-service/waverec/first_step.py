"""
First step of the wave recursion

xi_1 = -d/dt log tau + l(z) b is the general quasi-periodic solution of
Delta_U xi_1 = u + b, where l is a linear form with l(U) = 1 and
u = d/dt log tau(z) - d/dt log tau(z + U). The constant b is fixed by
asking the monodromy of xi_1 along a distinguished period to vanish.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from exceptions import NormalizationImpossibleError
from residuals.report import ResidualReport, sample_points
from taumodels.base_model import TauModel

logger = logging.getLogger(__name__)

DEGENERATE_FORM = 1e-12
RATE_PROBES = 8
_FIRST_STENCIL = ((-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0))


def normalizing_form(U, lam1, ell=None) -> np.ndarray:
    """
    Linear form l (as a vector, l(z) = l . z) with l(U) = 1 and l(lam1) != 0.

    Args:
        U: Shift vector
        lam1: Distinguished period
        ell: Proposed form; checked rather than constructed when given

    Raises:
        ValueError: If a proposed form has l(U) != 1
        NormalizationImpossibleError: If l(lam1) vanishes
    """
    U = np.atleast_1d(np.asarray(U, dtype=complex))
    lam1 = np.atleast_1d(np.asarray(lam1, dtype=complex))
    if ell is not None:
        ell = np.atleast_1d(np.asarray(ell, dtype=complex))
        if abs(ell @ U - 1) > 1e-12:
            raise ValueError(f"Linear form must satisfy l(U) = 1, got {ell @ U}")
        if abs(ell @ lam1) < DEGENERATE_FORM * np.linalg.norm(ell) * np.linalg.norm(lam1):
            raise NormalizationImpossibleError("The given linear form vanishes on the distinguished period")
        return ell
    if np.linalg.norm(lam1) == 0:
        raise NormalizationImpossibleError("The distinguished period is zero")
    ell = U.conj() / np.vdot(U, U).real
    if abs(ell @ lam1) < DEGENERATE_FORM * np.linalg.norm(ell) * np.linalg.norm(lam1):
        correction = lam1.conj() - (lam1.conj() @ U) * ell
        ell = ell + correction / np.vdot(lam1, lam1).real
    return ell


def monodromy_rate(model: TauModel, lam, t: complex, flow: str = "t", probes: Optional[np.ndarray] = None) -> complex:
    """
    d/dt b_lam(t) for tau(z + lam) = exp(a . z + b_lam(t)) tau(z).

    Evaluated as the difference of logarithmic flow derivatives at probe
    points and averaged over them.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if probes is None:
        angles = 2 * np.pi * np.arange(RATE_PROBES) / RATE_PROBES
        probes = 0.2 * model.scale * np.exp(1j * angles)[:, None] * np.ones(model.dim) + 0.05 * model.scale
    times = {flow: t}
    shifted = probes + lam
    rate = model.partial(shifted, times, (flow,)) / model.evaluate(shifted, times)
    rate = rate - model.partial(probes, times, (flow,)) / model.evaluate(probes, times)
    return complex(np.median(rate.real) + 1j * np.median(rate.imag))


def _log_derivative_by_differences(model: TauModel, points: np.ndarray, t: complex, flow: str) -> np.ndarray:
    """d/dt log tau from tau values alone (fourth-order differences)."""
    h = model.fd_step * model.scale
    total = sum(w * model.evaluate(points, {flow: t + j * h}) for j, w in _FIRST_STENCIL) / h
    return total / model.evaluate(points, {flow: t})


def verify_first_step(
    model: TauModel,
    lam1,
    U,
    ell=None,
    flow: str = "t",
    rng: Optional[np.random.Generator] = None,
    samples: int = 100,
    time_center: float = 0.0,
    time_spread: float = 0.5,
    spread: float = 0.4,
    generators: Optional[Sequence] = None,
) -> ResidualReport:
    """
    Check Delta_U xi_1 = u + b for xi_1 = -d/dt log tau + l(z) b.

    xi_1 uses the model's flow partials; u is computed independently from tau
    values by finite differences in t.

    Args:
        model: Tau model with the flow
        lam1: Distinguished period used for the normalization
        U: Shift vector
        ell: Optional linear form with l(U) = 1
        flow: Name of the time flow
        rng: Random generator for sample points and times
        samples: Number of (z, t) samples
        time_center: Center of the sampled time interval
        time_spread: Half-width of the sampled time interval
        spread: Half-width of the sampled z box
        generators: Periods whose normalized B_1 are reported (default: the model's)

    Returns:
        ResidualReport of the first step; extra holds b, its spread over the
        sampled times, normalized_B1 (measured monodromy of xi_1 along lam1)
        and B1 for each generator

    Raises:
        NormalizationImpossibleError: If l(lam1) = 0
    """
    rng = rng or np.random.default_rng(0)
    U = np.atleast_1d(np.asarray(U, dtype=complex))
    lam1 = np.atleast_1d(np.asarray(lam1, dtype=complex))
    ell = normalizing_form(U, lam1, ell)
    scale = ell @ lam1

    groups = max(1, samples // 10)
    per_group = int(np.ceil(samples / groups))
    times = time_center + time_spread * rng.uniform(-1, 1, groups)
    lhs, rhs, b_values, t_column, points_all = [], [], [], [], []
    normalized = 0.0
    for t in times:
        now = {flow: t}

        def factors(pts, now=now):
            return np.stack([model.evaluate(pts, now), model.evaluate(pts + U, now)], axis=1)

        points = sample_points(rng, per_group, model.dim, factors, spread)
        b = monodromy_rate(model, lam1, t, flow) / scale
        b_values.append(b)

        def xi1(pts, now=now, b=b):
            return -model.partial(pts, now, (flow,)) / model.evaluate(pts, now) + (pts @ ell) * b

        u = _log_derivative_by_differences(model, points, t, flow) - _log_derivative_by_differences(
            model, points + U, t, flow
        )
        lhs.append(xi1(points + U) - xi1(points))
        rhs.append(u + b)
        normalized = max(normalized, float(np.max(np.abs(xi1(points + lam1) - xi1(points)))))
        t_column.append(np.full(points.shape[0], t))
        points_all.append(points)

    points = np.vstack(points_all)
    columns = {f"z{j}": points[:, j] for j in range(model.dim)}
    columns["t"] = np.concatenate(t_column)
    b_values = np.array(b_values)
    b = complex(np.mean(b_values))
    extra = {
        "b": b,
        "b_spread": float(np.max(np.abs(b_values - b))),
        "normalized_B1": normalized,
        "linear_form": [complex(x) for x in ell],
    }
    for j, lam in enumerate(generators if generators is not None else model.lattice_generators):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        extra[f"B1_generator{j}"] = complex((ell @ lam) * b - monodromy_rate(model, lam, time_center, flow))
    report = ResidualReport.from_sides("first_step", np.concatenate(lhs), np.concatenate(rhs), None, columns, extra)
    logger.info(
        f"First recursion step: max residual {report.max_residual:.3e}, b={b:.6g}, "
        f"normalized B1 {normalized:.3e}"
    )
    return report
