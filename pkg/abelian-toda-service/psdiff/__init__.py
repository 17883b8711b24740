"""
Pseudo-difference operators: algebra on windows of sites, dressing of wave
functions, Lax identities, dual waves and the commuting ring.
"""

from psdiff.commuting import (
    CommutingRing,
    DependencyFit,
    commuting_operators,
    dependency_and_commute,
    fit_dependency,
    numerical_rank,
    sample_residue_family,
    select_basis,
)
from psdiff.dressing import (
    Dressing,
    continuous_waves,
    discrete_waves,
    dress,
    eigen_jets,
    eigen_residual,
    orbit_origin,
    wave_operator,
    wave_window,
)
from psdiff.dual import DualPairing, dual_pairing, dual_pole_order, dual_waves
from psdiff.lax import continuous_lax_identities, discrete_lax_identities, lax_check, time_derivative
from psdiff.operators import PsDiffOperator, op_algebra
from psdiff.sites import SiteSequence

__all__ = [
    "SiteSequence",
    "PsDiffOperator",
    "op_algebra",
    "Dressing",
    "dress",
    "wave_operator",
    "wave_window",
    "continuous_waves",
    "discrete_waves",
    "orbit_origin",
    "eigen_jets",
    "eigen_residual",
    "lax_check",
    "continuous_lax_identities",
    "discrete_lax_identities",
    "time_derivative",
    "DualPairing",
    "dual_pairing",
    "dual_waves",
    "dual_pole_order",
    "CommutingRing",
    "DependencyFit",
    "dependency_and_commute",
    "fit_dependency",
    "select_basis",
    "numerical_rank",
    "commuting_operators",
    "sample_residue_family",
]
