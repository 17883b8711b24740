"""
2D Toda lattice residuals

The field is phi_n = ln(tau_n / tau_{n+1}) along the lattice direction, so that
d_xi d_eta phi_n = exp(phi_{n-1} - phi_n) - exp(phi_n - phi_{n+1}) holds
exactly when d_xi d_eta ln tau_n = tau_{n+1} tau_{n-1} / tau_n^2. The tau
model carries the lattice index as the flow "n" next to "xi" and "eta".

The field runs from tau_n to tau_{n+1}. The opposite ratio ln(tau_{n+1} / tau_n)
turns the exponentials into tau_n^2 / (tau_{n-1} tau_{n+1}), which no gauge of a
bilinear solution satisfies.
"""

import logging
from typing import Iterable, Sequence, Tuple

import numpy as np

from residuals.report import ResidualReport
from residuals.secancy import FitResult, solve_linear_fit
from taumodels.base_model import TauModel
from taumodels.gauge import QuadraticForm
from taumodels.theta_tau import ThetaTau

logger = logging.getLogger(__name__)

VANISHING = 1e-8

GridPoint = Tuple[Sequence[complex], complex, complex]


def _log_laplacian(model: TauModel, z, times) -> Tuple[complex, complex]:
    """(tau, d_xi d_eta ln tau) at one point."""
    value = model.partial(z, times, ())
    d_xi = model.partial(z, times, ("xi",))
    d_eta = model.partial(z, times, ("eta",))
    mixed = model.partial(z, times, ("xi", "eta"))
    return value, mixed / value - d_xi * d_eta / (value * value)


def _site_data(model: TauModel, point: GridPoint, levels: Iterable[int]):
    z, xi, eta = point
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    values, laplacians = {}, {}
    for n in levels:
        values[n], laplacians[n] = _log_laplacian(model, z, {"n": n, "xi": xi, "eta": eta})
    return values, laplacians


def residual_toda2d(model: TauModel, grid: Sequence[GridPoint], n_range: Iterable[int] = (0,)) -> ResidualReport:
    """
    Residual of the 2D Toda equation at every grid point and lattice site.

    Args:
        model: Tau model with flows "n", "xi" and "eta"
        grid: Points (z, xi, eta)
        n_range: Lattice sites n to check

    Returns:
        ResidualReport with one row per (grid point, n); rows where a tau
        value is below 1e-8 of the largest one at that point are flagged
    """
    n_values = list(n_range)
    levels = range(min(n_values) - 1, max(n_values) + 3)
    lhs, rhs, flagged, sites, samples = [], [], [], [], []
    for index, point in enumerate(grid):
        values, laplacians = _site_data(model, point, levels)
        magnitudes = np.abs(np.array(list(values.values())))
        vanishing = bool(np.min(magnitudes) < VANISHING * max(np.max(magnitudes), 1e-300))
        for n in n_values:
            if vanishing:
                lhs.append(np.nan)
                rhs.append(np.nan)
            else:
                right_n = values[n + 1] * values[n - 1] / values[n] ** 2
                right_next = values[n + 2] * values[n] / values[n + 1] ** 2
                lhs.append(laplacians[n] - laplacians[n + 1])
                rhs.append(right_n - right_next)
            flagged.append(vanishing)
            sites.append(n)
            samples.append(index)
    columns = {"sample": np.array(samples), "n": np.array(sites)}
    return ResidualReport.from_sides("toda2d", lhs, rhs, flagged, columns)


def fit_toda_gauge(model: ThetaTau, grid: Sequence[GridPoint], n_values: Iterable[int] = (0,)) -> Tuple[ThetaTau, FitResult]:
    """
    Fit the gauge Q = X xi eta + (ln Y / 2) n^2 of a theta tau model.

    With this gauge d_xi d_eta ln tau_n = X + d_xi d_eta ln theta_n and the
    ratio tau_{n+1} tau_{n-1} / tau_n^2 gains the factor Y, so the Toda
    equation is linear in (X, Y).

    Returns:
        (gauged model, FitResult with values {'X', 'Y'})
    """
    bare = model.with_gauge(QuadraticForm())
    n_values = list(n_values)
    levels = range(min(n_values) - 1, max(n_values) + 2)
    ratios, laplacians = [], []
    for point in grid:
        values, laplace = _site_data(bare, point, levels)
        for n in n_values:
            ratios.append(values[n + 1] * values[n - 1] / values[n] ** 2)
            laplacians.append(laplace[n])
    ratios = np.array(ratios)
    laplacians = np.array(laplacians)
    (X, Y), condition, residual = solve_linear_fit([np.ones_like(ratios), -ratios], -laplacians)
    gauge = QuadraticForm({("xi", "eta"): X, ("n", "n"): 0.5 * np.log(Y)})
    logger.debug(f"Toda gauge fit: X={X:.6g}, Y={Y:.6g}, condition {condition:.2e}")
    return model.with_gauge(gauge), FitResult({"X": complex(X), "Y": complex(Y)}, condition, residual)


def toda_grid(rng: np.random.Generator, count: int, dim: int, spread: float = 0.4, time_spread: float = 0.5):
    """Random grid points (z, xi, eta) for the Toda checks."""
    grid = []
    for _ in range(count):
        z = spread * (rng.uniform(-1, 1, dim) + 1j * rng.uniform(-1, 1, dim))
        xi, eta = time_spread * rng.uniform(-1, 1, 2)
        grid.append((z, complex(xi), complex(eta)))
    return grid
