"""
Tau-function families with monodromy data, flow partials and divisor zero-finding.
"""

from taumodels.base_model import ConstantTau, TauModel, monodromy_check, tau_partials
from taumodels.divisor import DivisorZeros, divisor_zeros
from taumodels.elliptic_tau import EllipticPolynomialTau, SigmaTau
from taumodels.gauge import QuadraticForm
from taumodels.linear_gauge import LinearGauge
from taumodels.theta_tau import ThetaTau
from taumodels.trajectories import FrozenRoots, PolynomialPath, TrajectorySource, TrajectoryTable

__all__ = [
    "TauModel",
    "ConstantTau",
    "ThetaTau",
    "SigmaTau",
    "EllipticPolynomialTau",
    "QuadraticForm",
    "LinearGauge",
    "TrajectorySource",
    "FrozenRoots",
    "PolynomialPath",
    "TrajectoryTable",
    "DivisorZeros",
    "tau_partials",
    "monodromy_check",
    "divisor_zeros",
]
