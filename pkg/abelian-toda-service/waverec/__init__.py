"""
Wave-function recursion: first-step verification, the elliptic solver,
exact genus-one waves and the discrete residue checks.
"""

from waverec.elliptic_wave import BlochLayers, ContinuousEllipticWave, DiscreteEllipticWave
from waverec.first_step import monodromy_rate, normalizing_form, verify_first_step
from waverec.recursion import solve_recursion_elliptic
from waverec.residues import verify_discrete_residues
from waverec.wave_series import WaveSeries

__all__ = [
    "BlochLayers",
    "ContinuousEllipticWave",
    "DiscreteEllipticWave",
    "WaveSeries",
    "monodromy_rate",
    "normalizing_form",
    "verify_first_step",
    "solve_recursion_elliptic",
    "verify_discrete_residues",
]
