"""
Ruijsenaars-Schneider pole dynamics and its correspondence with tau divisors.
"""

from rsdyn.correspondence import correspondence_check, track_zeros
from rsdyn.integrator import RSTrajectory, fixed_step_endpoint, integrate, time_reversal_defect
from rsdyn.particles import ParticleState, check_separation, rs_potential, rs_rhs

__all__ = [
    "ParticleState",
    "RSTrajectory",
    "rs_rhs",
    "rs_potential",
    "check_separation",
    "integrate",
    "fixed_step_endpoint",
    "time_reversal_defect",
    "correspondence_check",
    "track_zeros",
]
