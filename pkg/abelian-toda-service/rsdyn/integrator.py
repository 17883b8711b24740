"""
Integration of the RS system.

Adaptive Dormand-Prince 5(4) through scipy's solve_ivp with dense output;
the resulting RSTrajectory is a trajectory source for EllipticPolynomialTau,
with accelerations taken from the equations of motion at the interpolated
state. A fixed-step variant built from the same tableau serves the
convergence study.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import RK45, solve_ivp

from exceptions import StepUnderflowError
from rsdyn.particles import ParticleState, rs_rhs, rs_taylor
from taumodels.trajectories import TrajectorySource

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-10
DEFAULT_NODES = 64


def _vector_field(template: ParticleState, coupling: float):
    n = template.N

    def field(t: float, y: np.ndarray) -> np.ndarray:
        state = template.with_vector(y)
        return np.concatenate([y[n:], rs_rhs(state, coupling)])

    return field


class RSTrajectory(TrajectorySource):
    """
    Dense RS solution on a time interval.

    Attributes:
        initial: Initial state
        t_span: Integration interval
        coupling: Interaction factor used for the run
        table: Positions and velocities at the output nodes
    """

    def __init__(self, initial: ParticleState, solution, t_span: Tuple[float, float], coupling: float, nodes):
        self.initial = initial
        self.solution = solution
        self.t_span = t_span
        self.coupling = coupling
        self.nodes = np.asarray(nodes, dtype=float)
        self.table = self._build_table()

    @property
    def count(self) -> int:
        return self.initial.N

    def state(self, t: float) -> ParticleState:
        return self.initial.with_vector(self.solution(t))

    def positions(self, t: float) -> np.ndarray:
        return self.solution(t)[: self.count]

    def velocities(self, t: float) -> np.ndarray:
        return self.solution(t)[self.count:]

    def accelerations(self, t: float) -> np.ndarray:
        return rs_rhs(self.state(t), self.coupling)

    def taylor(self, t: float, order: int) -> np.ndarray:
        """Taylor coefficients of the exact dynamics through the interpolated state at t."""
        return rs_taylor(self.state(t), order, self.coupling)

    def velocity_sum_drift(self) -> float:
        """Largest change of sum_i v_i over the output nodes."""
        start = self.initial.velocity_sum()
        return float(max(abs(self.state(t).velocity_sum() - start) for t in self.nodes))

    def _build_table(self) -> pd.DataFrame:
        data = {"t": self.nodes}
        values = np.array([self.solution(t) for t in self.nodes])
        for i in range(self.count):
            data[f"re_x{i}"] = values[:, i].real
            data[f"im_x{i}"] = values[:, i].imag
        for i in range(self.count):
            data[f"re_v{i}"] = values[:, self.count + i].real
            data[f"im_v{i}"] = values[:, self.count + i].imag
        return pd.DataFrame(data)


def integrate(
    state: ParticleState,
    t_span: Tuple[float, float] = (0.0, 1.0),
    tol: float = DEFAULT_TOLERANCE,
    nodes: Optional[Sequence[float]] = None,
    coupling: float = 1.0,
) -> RSTrajectory:
    """
    Integrate the RS system with adaptive RK45.

    Args:
        state: Initial state
        t_span: (t0, t1); t1 < t0 integrates backwards
        tol: Relative and absolute local error tolerance
        nodes: Output times (default: evenly spaced over t_span)
        coupling: Interaction factor; values other than 1 leave the RS system

    Returns:
        RSTrajectory with dense output

    Raises:
        CollisionError: If particles approach each other during the run
        StepUnderflowError: If the solver fails to advance
    """
    nodes = np.linspace(t_span[0], t_span[1], DEFAULT_NODES) if nodes is None else np.asarray(nodes, dtype=float)
    logger.info(f"Integrating RS system: N={state.N}, t_span={t_span}, tol={tol:.1e}, coupling={coupling}")
    result = solve_ivp(
        _vector_field(state, coupling),
        t_span,
        state.pack(),
        method="RK45",
        rtol=tol,
        atol=tol,
        dense_output=True,
    )
    if not result.success:
        raise StepUnderflowError(float(result.t[-1]), result.message)
    logger.debug(f"RK45 finished with {result.t.size} steps and {result.nfev} evaluations")
    return RSTrajectory(state, result.sol, t_span, coupling, nodes)


def fixed_step_endpoint(state: ParticleState, t_end: float, n_steps: int, coupling: float = 1.0) -> ParticleState:
    """State at t_end after n_steps Dormand-Prince steps of equal size, fifth-order weights."""
    field = _vector_field(state, coupling)
    A, B, C = RK45.A, RK45.B, RK45.C
    h = t_end / n_steps
    y = state.pack()
    t = 0.0
    for _ in range(n_steps):
        stages = np.zeros((len(C), y.size), dtype=complex)
        for k in range(len(C)):
            stages[k] = field(t + C[k] * h, y + h * (A[k, :k] @ stages[:k]))
        y = y + h * (B @ stages)
        t += h
    return state.with_vector(y)


def time_reversal_defect(state: ParticleState, t_end: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """
    Integrate to t_end, negate the velocities and integrate for the same time again.

    The flow is even in the velocities, so the run must come back to the
    initial positions; the largest position error is returned.
    """
    forward = integrate(state, (0.0, t_end), tol, nodes=[t_end])
    back = integrate(forward.state(t_end).reversed(), (0.0, t_end), tol, nodes=[t_end])
    return float(np.max(np.abs(back.positions(t_end) - state.x)))
