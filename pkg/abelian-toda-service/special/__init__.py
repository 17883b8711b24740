"""
Complex special functions: Riemann theta with characteristics, the Kummer map
and the Weierstrass sigma/zeta functions.
"""

from special.theta import (
    Characteristic,
    RiemannMatrix,
    kummer_coordinates,
    kummer_map,
    riemann_theta,
    theta_char,
)
from special.weierstrass import EllipticLattice, weierstrass

__all__ = [
    "Characteristic",
    "RiemannMatrix",
    "EllipticLattice",
    "riemann_theta",
    "theta_char",
    "kummer_map",
    "kummer_coordinates",
    "weierstrass",
]
