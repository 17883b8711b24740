"""
Residuals of the bilinear identities, on-divisor relations and constant fits.
"""

from residuals.discrete import bdhe_gauge, bdhe_model, discrete_secancy_constants, residual_discrete
from residuals.on_divisor import divisor_points, on_divisor_checks
from residuals.report import ResidualReport, relative_residual, sample_points
from residuals.secancy import FitResult, SecancyData, fit_constants, residual_secancy, secancy_holdout
from residuals.toda import fit_toda_gauge, residual_toda2d, toda_grid
from residuals.trisecant import trisecant_rank

__all__ = [
    "ResidualReport",
    "SecancyData",
    "FitResult",
    "relative_residual",
    "sample_points",
    "residual_secancy",
    "residual_discrete",
    "residual_toda2d",
    "fit_constants",
    "fit_toda_gauge",
    "secancy_holdout",
    "discrete_secancy_constants",
    "bdhe_gauge",
    "bdhe_model",
    "toda_grid",
    "divisor_points",
    "on_divisor_checks",
    "trisecant_rank",
]
