"""
Elliptic wave recursion

Solves Delta_U xi_{s+1} = d/dt xi_s + (u + b) xi_s order by order for
tau = prod_i sigma(z - x_i(t)) at a set of t-nodes. Each xi_s is sought in
the span of 1 and the Bloch layers f_j(z - x_i), j <= s, so every
coefficient is 2 omega1-periodic with simple poles at the particles.

At every node the recursion is expanded in powers of t - t_k. The particle
paths come as Taylor series from the trajectory source, the layers at fixed
collocation points are composed with them, and every power is fitted by
collocation on rings around the poles and on scattered points of the cell.
The t-derivative of the still undetermined constant c_s enters as one extra
unknown; c_s itself is carried from node to node by two-point Hermite
quadrature of that derivative, starting from c_s(t0) = 0 plus an optional
t-independent gauge constant. Since u + b = sum_i v_i Delta_U f_1(z - x_i)
while sum_i v_i is conserved, c_s contributes c_s v_i to the first layer
of xi_{s+1}.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from exceptions import DegenerateConfigurationError, NoSimplePoleSolutionError
from residuals.on_divisor import on_divisor_checks
from residuals.secancy import SecancyData
from taumodels.elliptic_tau import EllipticPolynomialTau
from utils.numeric_utils import NumericUtils
from waverec.elliptic_wave import BlochLayers
from waverec.wave_series import WaveSeries

logger = logging.getLogger(__name__)

COLLOCATION_TOLERANCE = 1e-6
CONDITION_LIMIT = 1e12
RS_TOLERANCE = 1e-6
MONODROMY_DRIFT = 1e-7
POLE_RING = 0.1
POLE_CLEARANCE = 0.03
RING_POINTS = 8
FAR_POINTS = 12
FAR_REACH = 0.45
EXTRA_ORDERS = 2


@dataclass
class _Frame:
    """Points at one node with the layers evaluated there, arrays (S + 1, M, N)."""

    points: np.ndarray
    f: np.ndarray
    f_y: np.ndarray
    f_shift: np.ndarray
    u: np.ndarray


@dataclass
class _SeriesFrame:
    """
    Taylor series in t - t_k at fixed collocation points.

    layers and jumps have shape (S + 1, P + 1, M, N): f_j(z - x_i(t)) and
    f_j(z + U - x_i(t)) - f_j(z - x_i(t)). weight (P, M) is u + b and
    velocity (P, N) holds the particle velocities.
    """

    points: np.ndarray
    layers: np.ndarray
    jumps: np.ndarray
    weight: np.ndarray
    velocity: np.ndarray


def _combine(coefficients: np.ndarray, layers: np.ndarray) -> np.ndarray:
    """sum_i sum_j coefficients[i, j - 1] f_j(. - x_i)."""
    if layers.shape[2] == 0:
        return np.zeros(layers.shape[1], dtype=complex)
    return np.einsum("ij,jmi->m", coefficients, layers[1:])


def _combine_series(coefficients: np.ndarray, layers: np.ndarray, order: int) -> np.ndarray:
    """Series of sum_i sum_j a_{i,j}(t) f_j(. - x_i(t)); coefficients (P + 1, N, S), layers (S + 1, P + 1, M, N)."""
    out = np.zeros((order + 1, layers.shape[2]), dtype=complex)
    if layers.shape[3] == 0:
        return out
    for n in range(order + 1):
        for m in range(n + 1):
            out[n] += np.einsum("ij,jpi->p", coefficients[m], layers[1:, n - m])
    return out


def _points(positions: np.ndarray, U: complex, cell: float, far: np.ndarray, phase: float, lattice) -> np.ndarray:
    """Rings around x_i and x_i - U plus scattered points, kept clear of the poles."""
    poles = np.concatenate([positions, positions - U])
    ring = POLE_RING * cell * np.exp(1j * (2 * np.pi * np.arange(RING_POINTS) / RING_POINTS + phase))
    center = complex(np.mean(positions)) if positions.size else 0.0
    candidates = np.concatenate([(poles[:, None] + ring[None, :]).ravel(), center + far])
    if poles.size:
        clearance = np.min(lattice.distance_to_lattice(candidates[:, None] - poles[None, :]), axis=1)
        candidates = candidates[clearance > POLE_CLEARANCE * cell]
    return candidates


def _frame(model: EllipticPolynomialTau, layers: BlochLayers, U: complex, t: float, points: np.ndarray,
           positions: np.ndarray) -> _Frame:
    count = positions.size
    M = points.size
    order = layers.order + 1
    if count:
        f, f_y = layers.values_and_derivatives(points[:, None] - positions[None, :])
        f_shift = layers.values(points[:, None] + U - positions[None, :])
        f, f_y, f_shift = (a.reshape(order, M, count) for a in (f, f_y, f_shift))
    else:
        zero = np.zeros((order, M, 0), dtype=complex)
        return _Frame(points, zero, zero, zero, np.zeros(M, dtype=complex))
    times = {model.flow: t}
    pts = points.reshape(-1, 1)
    u = model.partial(pts, times, (model.flow,)) / model.evaluate(pts, times)
    u = u - model.partial(pts + U, times, (model.flow,)) / model.evaluate(pts + U, times)
    return _Frame(points, f, f_y, f_shift, np.asarray(u, dtype=complex).reshape(-1))


def _series_frame(trajectory, layers: BlochLayers, U: complex, t: float, points: np.ndarray, order: int,
                  b: complex) -> _SeriesFrame:
    X = np.asarray(trajectory.taylor(t, order), dtype=complex)
    count = X.shape[1]
    M = points.size
    rows = layers.order + 1
    velocity = np.arange(1, order + 1)[:, None] * X[1:]
    if count == 0:
        zero = np.zeros((rows, order + 1, M, 0), dtype=complex)
        weight = np.zeros((order, M), dtype=complex)
        weight[0] = b
        return _SeriesFrame(points, zero, zero, weight, velocity)
    drift = X[0] - X
    drift[0] = 0.0

    def moving(y: np.ndarray) -> np.ndarray:
        taylor = layers.taylor(y.ravel(), order).reshape(rows, order + 1, M, count)
        composed = NumericUtils.series_compose(np.moveaxis(taylor, 1, 0), drift[:, None, None, :])
        return np.moveaxis(composed, 0, 1)

    f = moving(points[:, None] - X[0][None, :])
    jumps = moving(points[:, None] + U - X[0][None, :]) - f
    weight = NumericUtils.series_product(velocity[:, None, :], jumps[1], order - 1).sum(axis=2)
    weight = weight + (layers.c * U) * velocity.sum(axis=1)[:, None]
    weight[0] += b
    return _SeriesFrame(points, f, jumps, weight, velocity)


def _collocation_matrix(jumps: np.ndarray, s: int, with_constant: bool):
    """Normalized columns Delta_U f_j(. - x_i), j <= s + 1, and -1 for d/dt c_s; returns (matrix, norms, condition)."""
    count = jumps.shape[2]
    columns = [jumps[j, :, i] for i in range(count) for j in range(1, s + 2)]
    if with_constant:
        columns.append(-np.ones(jumps.shape[1], dtype=complex))
    if not columns:
        return None, None, 1.0
    matrix = np.stack(columns, axis=1)
    norms = np.linalg.norm(matrix, axis=0)
    if np.any(norms == 0):
        raise DegenerateConfigurationError(f"Vanishing collocation column at step {s + 1}")
    singular = linalg.svdvals(matrix / norms)
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0 else float("inf")
    if singular.size < matrix.shape[1] or condition > CONDITION_LIMIT:
        raise DegenerateConfigurationError(
            f"Collocation matrix at step {s + 1} is rank deficient (condition {condition:.3e})", condition
        )
    return matrix, norms, condition


def _solve_node(frame: _SeriesFrame, previous: np.ndarray, s: int, order: int):
    """
    Series of the layer coefficients of xi_{s+1} without the c_s part and of d/dt c_s at one node.

    Args:
        frame: Series frame of the node
        previous: Layer series of xi_s, shape (>= order + 2, N, S)
        s: Level being differentiated
        order: Highest power of t - t_k kept for xi_{s+1}

    Returns:
        (layers (order + 1, N, S), growth (order + 1,), relative residual of the leading power, condition)
    """
    rows, _, _, count = frame.layers.shape
    depth = rows - 1
    L = _combine_series(previous, frame.layers, order + 1)
    rhs = np.arange(1, order + 2)[:, None] * L[1:] + NumericUtils.series_product(frame.weight, L, order)
    layers = np.zeros((order + 1, count, depth), dtype=complex)
    growth = np.zeros(order + 1, dtype=complex)
    matrix, norms, condition = _collocation_matrix(frame.jumps[:, 0], s, with_constant=s > 0)
    scale = float(np.max(np.abs(rhs[0]), initial=0.0))
    if matrix is None:
        return layers, growth, scale, condition
    residual = 0.0
    for n in range(order + 1):
        target = rhs[n] - sum(_combine(layers[n - m], frame.jumps[:, m]) for m in range(1, n + 1))
        solution = linalg.lstsq(matrix / norms, target)[0] / norms
        layers[n, :, : s + 1] = solution[: count * (s + 1)].reshape(count, s + 1)
        if s > 0:
            growth[n] = solution[-1]
        if n == 0:
            defect = float(np.max(np.abs(matrix @ solution - target)))
            residual = defect / scale if scale > 0 else defect
    return layers, growth, residual, condition


def _pole_dynamics_residual(model: EllipticPolynomialTau, U: complex, nodes: np.ndarray, positions: np.ndarray) -> float:
    worst = 0.0
    for t, x in zip(nodes, positions):
        d = SecancyData(model, None, U=[U], time=float(t))
        residual = on_divisor_checks(d, x.reshape(-1, 1), "rs").max_residual
        if np.isfinite(residual):
            worst = max(worst, residual)
    return worst


def _fit_monodromy(differences: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    B_1..B_S from xi_s(z + lam) - xi_s(z) = sum_{i=1}^{s} B_i xi_{s-i}(z).

    Args:
        differences: Shape (S + 1, M), row s holds the shift difference of xi_s
        values: Shape (S + 1, M), row s holds xi_s

    Returns:
        (B, closure): B has shape (S,); closure is the largest deviation from a constant fit
    """
    depth = values.shape[0] - 1
    B = np.zeros(depth, dtype=complex)
    closure = 0.0
    for s in range(1, depth + 1):
        remainder = differences[s] - sum(B[i - 1] * values[s - i] for i in range(1, s))
        B[s - 1] = np.mean(remainder)
        scale = max(1.0, float(np.max(np.abs(differences[s]))))
        closure = max(closure, float(np.max(np.abs(remainder - B[s - 1]))) / scale)
    return B, closure


def solve_recursion_elliptic(
    model: EllipticPolynomialTau,
    U: complex,
    depth: int,
    nodes,
    rng: Optional[np.random.Generator] = None,
    gauge: Optional[Dict[int, complex]] = None,
    tolerance: float = COLLOCATION_TOLERANCE,
) -> WaveSeries:
    """
    Solve the wave recursion up to order `depth` along the model's trajectory.

    Args:
        model: Elliptic polynomial tau with its particle trajectory
        U: Shift of the difference equation
        depth: Highest order S
        nodes: Strictly increasing t-nodes, at least two
        rng: Generator for the scattered collocation points
        gauge: t-independent constants added to c_s, keyed by s
        tolerance: Largest accepted relative collocation residual

    Returns:
        WaveSeries with diagnostics 'collocation', 'holdout' (per order),
        'monodromy_drift', 'monodromy_closure', 'pole_dynamics',
        'velocity_sum_drift' and 'condition'

    Raises:
        NoSimplePoleSolutionError: If some order has no simple-pole solution
        DegenerateConfigurationError: If a collocation matrix is rank deficient
    """
    if depth < 1:
        raise ValueError(f"Recursion depth must be at least 1, got {depth}")
    nodes = np.asarray(nodes, dtype=float).reshape(-1)
    if nodes.size < 2:
        raise ValueError(f"The t-grid needs at least 2 nodes, got {nodes.size}")
    if np.any(np.diff(nodes) <= 0):
        raise ValueError("The t-nodes must be strictly increasing")
    rng = rng or np.random.default_rng(0)
    gauge = gauge or {}
    U = complex(U)
    lattice = model.lattice
    cell = lattice.cell_size
    count = model.count
    order = depth + EXTRA_ORDERS

    positions = np.array([model.trajectory.positions(t) for t in nodes], dtype=complex).reshape(nodes.size, count)
    velocities = np.array([model.trajectory.velocities(t) for t in nodes], dtype=complex).reshape(nodes.size, count)
    velocity_sum = velocities.sum(axis=1)
    b = complex(-lattice.eta1 / lattice.omega1 * U * velocity_sum[0])

    pole_dynamics = _pole_dynamics_residual(model, U, nodes, positions) if count else 0.0
    if pole_dynamics > RS_TOLERANCE:
        logger.warning(f"Particles violate the pole-dynamics relation: residual {pole_dynamics:.3e}")

    layers = BlochLayers(lattice, depth)
    far = FAR_REACH * cell * (rng.uniform(-1, 1, FAR_POINTS) + 1j * rng.uniform(-1, 1, FAR_POINTS))
    spare = FAR_REACH * cell * (rng.uniform(-1, 1, FAR_POINTS) + 1j * rng.uniform(-1, 1, FAR_POINTS))
    frames = [
        _series_frame(model.trajectory, layers, U, t, _points(x, U, cell, far, 0.0, lattice), order, b)
        for t, x in zip(nodes, positions)
    ]

    constants = np.zeros((depth + 1, nodes.size), dtype=complex)
    constants[0] = 1.0
    constant_rates = np.zeros_like(constants)
    coefficients = np.zeros((depth + 1, nodes.size, count, depth), dtype=complex)
    layer_rates = np.zeros_like(coefficients)
    series = [np.zeros((order + 1, count, depth), dtype=complex) for _ in nodes]
    collocation: Dict[int, float] = {}
    worst_condition = 1.0

    for s in range(depth):
        top = order - s - 1
        solved = []
        growth = np.zeros((nodes.size, top + 1), dtype=complex)
        worst = 0.0
        for k, frame in enumerate(frames):
            level, growth[k], residual, condition = _solve_node(frame, series[k], s, top)
            worst_condition = max(worst_condition, condition)
            if residual > tolerance:
                raise NoSimplePoleSolutionError(s + 1, residual, float(nodes[k]))
            worst = max(worst, residual)
            solved.append(level)

        charge = np.zeros((nodes.size, top + 1), dtype=complex)
        if s == 0:
            charge[:, 0] = 1.0
        else:
            charge[0, 0] = gauge.get(s, 0.0)
            for k, h in enumerate(np.diff(nodes)):
                charge[k + 1, 0] = charge[k, 0] + NumericUtils.hermite_integral(growth[k], growth[k + 1], h)
            charge[:, 1:] = growth[:, :-1] / np.arange(1, top + 1)
            constants[s] = charge[:, 0]
            constant_rates[s] = growth[:, 0]

        for k, level in enumerate(solved):
            level[:, :, 0] += NumericUtils.series_product(charge[k][:, None], frames[k].velocity, top)
            series[k] = level
            coefficients[s + 1, k] = level[0]
            layer_rates[s + 1, k] = level[1]
        collocation[s + 1] = worst
        logger.debug(f"Order {s + 1}: collocation residual {worst:.3e}")

    holdout, drift, closure, monodromy = _verify(
        model, layers, U, b, nodes, positions, velocities, constants, coefficients, constant_rates, layer_rates, spare
    )
    diagnostics = {
        "collocation": collocation,
        "holdout": holdout,
        "monodromy_drift": drift,
        "monodromy_closure": closure,
        "pole_dynamics": pole_dynamics,
        "velocity_sum_drift": float(np.max(np.abs(velocity_sum - velocity_sum[0]))),
        "condition": worst_condition,
    }
    if drift.get("2omega2", 0.0) > MONODROMY_DRIFT:
        logger.warning(f"Fitted monodromy varies in t by {drift['2omega2']:.3e}")
    logger.info(
        f"Wave recursion to order {depth} over {nodes.size} nodes: worst holdout "
        f"{max(holdout.values()):.3e}, monodromy drift {max(drift.values()):.3e}"
    )
    return WaveSeries(
        lattice, U, nodes, positions, velocities, b, constants, coefficients, monodromy, diagnostics,
        constant_rates=constant_rates, layer_rates=layer_rates,
    )


def _verify(model, layers, U, b, nodes, positions, velocities, constants, coefficients, constant_rates,
            layer_rates, spare):
    """Holdout residuals of every order and monodromy fits along both periods."""
    lattice = model.lattice
    depth = constants.shape[0] - 1
    count = positions.shape[1]
    periods = {"2omega1": 2 * lattice.omega1, "2omega2": 2 * lattice.omega2}
    holdout = {s: 0.0 for s in range(1, depth + 1)}
    fitted = {name: np.zeros((nodes.size, depth), dtype=complex) for name in periods}
    closure = {name: 0.0 for name in periods}

    for k, (t, x) in enumerate(zip(nodes, positions)):
        points = _points(x, U, lattice.cell_size, spare, np.pi / RING_POINTS, lattice)
        frame = _frame(model, layers, U, t, points, x)
        values = np.array([constants[s, k] + _combine(coefficients[s, k], frame.f) for s in range(depth + 1)])
        for s in range(depth):
            moving = coefficients[s, k] * velocities[k][:, None]
            xi_dot = constant_rates[s, k] + _combine(layer_rates[s, k], frame.f) - _combine(moving, frame.f_y)
            rhs = xi_dot + (frame.u + b) * values[s]
            lhs = _combine(coefficients[s + 1, k], frame.f_shift) - _combine(coefficients[s + 1, k], frame.f)
            scale = max(float(np.max(np.abs(rhs))), 1e-300)
            holdout[s + 1] = max(holdout[s + 1], float(np.max(np.abs(lhs - rhs))) / scale)
        for name, lam in periods.items():
            if count:
                moved = layers.values(points[:, None] + lam - x[None, :]).reshape(depth + 1, points.size, count)
            else:
                moved = frame.f
            differences = np.array([_combine(coefficients[s, k], moved - frame.f) for s in range(depth + 1)])
            fitted[name][k], fit_closure = _fit_monodromy(differences, values)
            closure[name] = max(closure[name], fit_closure)

    drift = {name: float(np.max(np.abs(B - B[0]))) for name, B in fitted.items()}
    return holdout, drift, closure, fitted
