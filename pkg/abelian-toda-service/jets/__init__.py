"""
Truncated formal series in k^-1 used for wave functions and operator symbols.
"""

from jets.jet import Jet, jet_arith

__all__ = ["Jet", "jet_arith"]
