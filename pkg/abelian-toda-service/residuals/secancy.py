"""
Secancy identities

Residuals of the continuous secancy identity in its theta form and in its
restricted tau form, the differential-difference Lax equation it encodes,
and least-squares fitting of the constants (p, E) that enter all of them.
The discrete identities share the data container and the fitting entry point.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from exceptions import DegenerateConfigurationError
from special.theta import RiemannMatrix, riemann_theta
from special.weierstrass import EllipticLattice
from taumodels.base_model import TauModel
from taumodels.elliptic_tau import SigmaTau
from taumodels.theta_tau import ThetaTau
from residuals.report import ResidualReport, flag_small, relative_residual, sample_points

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e8
FAY_AGREEMENT = 1e-10
CONTINUOUS_VARIANTS = ("fay", "fay1", "laxdd_pd")
DISCRETE_VARIANTS = ("fay0", "fay2")

_FIRST_STENCIL = ((-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0))


@dataclass
class SecancyData:
    """
    Tau pair and vectors entering a secancy identity.

    For continuous data the flow is the time t and the shift is U; for
    discrete data the flow is nu, the shift is W and `p` holds the scalar p.W.
    """

    tau: TauModel
    tau_A: Optional[TauModel]
    U: Optional[np.ndarray] = None
    A: Optional[np.ndarray] = None
    V: Optional[np.ndarray] = None
    W: Optional[np.ndarray] = None
    p: Optional[complex] = None
    E: Optional[complex] = None
    B: Optional[RiemannMatrix] = None
    flow: str = "t"
    time: complex = 0.0
    label: str = field(default="", compare=False)

    def __post_init__(self):
        for name in ("U", "A", "V", "W"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, np.atleast_1d(np.asarray(value, dtype=complex)))
        shift = self.W if self.discrete else self.U
        if shift is None or np.allclose(shift, 0):
            raise ValueError(f"Shift vector {'W' if self.discrete else 'U'} must be nonzero")
        if not self.discrete and self.A is not None and self._is_period(self.U - self.A):
            raise ValueError("U must differ from A modulo the period lattice")

    @property
    def discrete(self) -> bool:
        return self.flow == "nu"

    @property
    def dim(self) -> int:
        return self.tau.dim

    @property
    def times(self) -> Dict[str, complex]:
        return {self.flow: self.time}

    def _is_period(self, vec: np.ndarray) -> bool:
        if self.B is not None:
            n = self.B.y_inverse @ vec.imag
            m = vec.real - self.B.entries.real @ n
            return bool(np.allclose(n, np.round(n), atol=1e-10) and np.allclose(m, np.round(m), atol=1e-10))
        lattice = getattr(self.tau, "lattice", None)
        if lattice is not None and vec.shape == (1,):
            return bool(lattice.distance_to_lattice(vec[0]) < 1e-10)
        return bool(np.allclose(vec, 0))

    def with_constants(self, p: complex, E: complex) -> "SecancyData":
        return replace(self, p=complex(p), E=complex(E))

    @classmethod
    def from_theta(cls, B: RiemannMatrix, U, A, V, z0=None, p=None, E=None, time: complex = 0.0) -> "SecancyData":
        """tau = theta(z + z0 + tV), tau_A = theta(z + z0 + A + tV)."""
        base = np.zeros(B.g, dtype=complex) if z0 is None else np.atleast_1d(np.asarray(z0, dtype=complex))
        A = np.atleast_1d(np.asarray(A, dtype=complex))
        tau = ThetaTau(B, {"t": V}, base)
        tau_A = ThetaTau(B, {"t": V}, base + A)
        return cls(tau, tau_A, U=U, A=A, V=V, p=p, E=E, B=B, time=time)

    @classmethod
    def from_theta_discrete(cls, B: RiemannMatrix, A, V, W, z0=None, pW=None, E=None, nu: complex = 0.0) -> "SecancyData":
        """tau(z, nu) = theta(z + z0 + V nu), tau_A(z, nu) = theta(z + z0 + A + V nu)."""
        base = np.zeros(B.g, dtype=complex) if z0 is None else np.atleast_1d(np.asarray(z0, dtype=complex))
        A = np.atleast_1d(np.asarray(A, dtype=complex))
        tau = ThetaTau(B, {"nu": V}, base)
        tau_A = ThetaTau(B, {"nu": V}, base + A)
        return cls(tau, tau_A, A=A, V=V, W=W, p=pW, E=E, B=B, flow="nu", time=nu)

    @classmethod
    def from_sigma(cls, lattice: EllipticLattice, U, A, V, z0: complex = 0.0, p=None, E=None) -> "SecancyData":
        """Genus-one continuous data tau = sigma(z + z0 + tV), tau_A = sigma(z + z0 + A + tV)."""
        A = complex(np.asarray(A).ravel()[0])
        tau = SigmaTau(lattice, {"t": complex(np.asarray(V).ravel()[0])}, z0)
        tau_A = SigmaTau(lattice, {"t": complex(np.asarray(V).ravel()[0])}, z0 + A)
        return cls(tau, tau_A, U=U, A=A, V=V, p=p, E=E)

    @classmethod
    def from_sigma_discrete(
        cls, lattice: EllipticLattice, A, V, W, z0: complex = 0.0, pW=None, E=None, nu: complex = 0.0
    ) -> "SecancyData":
        """Genus-one discrete data tau = sigma(z + z0 + V nu), tau_A = sigma(z + z0 + A + V nu)."""
        A = complex(np.asarray(A).ravel()[0])
        V = complex(np.asarray(V).ravel()[0])
        tau = SigmaTau(lattice, {"nu": V}, z0)
        tau_A = SigmaTau(lattice, {"nu": V}, z0 + A)
        return cls(tau, tau_A, A=A, V=V, W=W, p=pW, E=E, flow="nu", time=nu)

    def at(self, model: TauModel, points: np.ndarray, offset=None, dt: complex = 0.0) -> np.ndarray:
        """Evaluate a model of the pair at points + offset and flow time + dt."""
        moved = points if offset is None else points + offset
        return np.atleast_1d(model.evaluate(moved, {self.flow: self.time + dt}))

    def dot(self, model: TauModel, points: np.ndarray, offset=None) -> np.ndarray:
        moved = points if offset is None else points + offset
        return np.atleast_1d(model.partial(moved, {self.flow: self.time}, (self.flow,)))

    def factor_values(self, points: np.ndarray) -> np.ndarray:
        """Values that must stay away from zero for the identity to be well conditioned."""
        columns = [self.at(self.tau, points)]
        if self.discrete:
            for sign in (1, -1):
                columns.append(self.at(self.tau, points, sign * self.W))
                columns.append(self.at(self.tau, points, dt=sign))
                if self.tau_A is not None:
                    columns.append(self.at(self.tau_A, points, sign * self.W))
                    columns.append(self.at(self.tau_A, points, dt=sign))
        else:
            columns.append(self.at(self.tau, points, self.U))
            columns.append(self.at(self.tau, points, -self.U))
            if self.tau_A is not None:
                columns.append(self.at(self.tau_A, points))
                columns.append(self.at(self.tau_A, points, self.U))
        return np.stack(columns, axis=1)

    def sample(self, rng: np.random.Generator, count: int, spread: float = 0.4) -> np.ndarray:
        return sample_points(rng, count, self.dim, self.factor_values, spread)


@dataclass
class FitResult:
    """Fitted constants with the conditioning of the solve and the fit-point residual."""

    values: Dict[str, complex]
    condition: float
    residual: float

    @property
    def p(self) -> complex:
        return self.values.get("p", self.values.get("pW"))

    @property
    def E(self) -> complex:
        return self.values["E"]


def _points(d: SecancyData, samples) -> np.ndarray:
    return np.asarray(samples, dtype=complex).reshape(-1, d.dim)


def _fay_terms(d: SecancyData, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Terms X1, X2, X3 of E X1 - e^p X2 = X3 from theta values directly."""
    if d.B is None or d.V is None or d.A is None:
        raise ValueError("Variant 'fay' needs pure theta data (B, A, U, V)")
    z = d.tau.argument(points, d.times) if isinstance(d.tau, ThetaTau) else points

    def theta(shift, dirs=()):
        return np.atleast_1d(riemann_theta(z + shift, d.B, dirs))

    th_A, th_U, th_AU, th_0 = theta(d.A), theta(d.U), theta(d.A + d.U), theta(0)
    rhs = theta(d.U, [d.V]) * th_A - theta(d.A, [d.V]) * th_U
    return th_A * th_U, th_AU * th_0, rhs


def _fay1_terms(d: SecancyData, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    tau_A, tau_AU = d.at(d.tau_A, points), d.at(d.tau_A, points, d.U)
    tau_0, tau_U = d.at(d.tau, points), d.at(d.tau, points, d.U)
    rhs = d.dot(d.tau, points, d.U) * tau_A - tau_U * d.dot(d.tau_A, points)
    return tau_A * tau_U, tau_AU * tau_0, rhs


def _fay2_terms(d: SecancyData, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Terms L, M, N of L = e^{2pW} M + e^{pW - E} N."""
    lhs = d.at(d.tau, points, d.W) * d.at(d.tau_A, points, -d.W)
    middle = d.at(d.tau, points, -d.W) * d.at(d.tau_A, points, d.W)
    last = d.at(d.tau, points, dt=1) * d.at(d.tau_A, points, dt=-1)
    return lhs, middle, last


def _fay0_terms(d: SecancyData, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    if d.B is None or d.V is None or d.A is None:
        raise ValueError("Variant 'fay0' needs pure theta data (B, A, V, W)")
    z = d.tau.argument(points, d.times) if isinstance(d.tau, ThetaTau) else points

    def theta(shift):
        return np.atleast_1d(riemann_theta(z + shift, d.B))

    lhs = theta(d.W) * theta(d.A - d.W)
    middle = theta(d.A + d.W) * theta(-d.W)
    last = theta(d.V) * theta(d.A - d.V)
    return lhs, middle, last


def _laxdd_sides(d: SecancyData, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Both sides of d_t psi_0 = psi_1 - u_0 psi_0 with psi_n = tau_A/tau (z + nU) e^{np + tE}."""
    h = 10.0 * d.tau.fd_step * d.tau.scale

    def psi(n: int, dt: complex = 0.0) -> np.ndarray:
        offset = n * d.U
        ratio = d.at(d.tau_A, points, offset, dt) / d.at(d.tau, points, offset, dt)
        return ratio * np.exp(n * d.p + (d.time + dt) * d.E)

    psi_dot = sum(w * psi(0, j * h) for j, w in _FIRST_STENCIL) / h
    u0 = d.dot(d.tau, points) / d.at(d.tau, points) - d.dot(d.tau, points, d.U) / d.at(d.tau, points, d.U)
    return psi_dot, psi(1) - u0 * psi(0)


def residual_secancy(d: SecancyData, samples: Sequence, variant: str = "fay1") -> ResidualReport:
    """
    Per-sample residual of a continuous secancy identity.

    Args:
        d: Secancy data with constants p and E
        samples: Points z, shape (n, d)
        variant: 'fay' (theta form), 'fay1' (tau pair form) or 'laxdd_pd'
            (the Lax equation for psi_n built from the pair)

    Returns:
        ResidualReport; for 'fay1' on ungauged theta data the extra entry
        'fay_agreement' holds the largest pointwise difference to 'fay'
    """
    if variant not in CONTINUOUS_VARIANTS:
        raise ValueError(f"Unknown secancy variant '{variant}'; expected one of {CONTINUOUS_VARIANTS}")
    if d.p is None or d.E is None:
        raise ValueError("Secancy data has no constants; run fit_constants first")
    points = _points(d, samples)
    flagged = flag_small(d.factor_values(points))
    extra: Dict[str, object] = {}

    if variant == "laxdd_pd":
        lhs, rhs = _laxdd_sides(d, points)
    else:
        X1, X2, X3 = _fay_terms(d, points) if variant == "fay" else _fay1_terms(d, points)
        lhs, rhs = d.E * X1 - np.exp(d.p) * X2, X3
        if variant == "fay1" and _pure_theta(d):
            F1, F2, F3 = _fay_terms(d, points)
            theta_residual = relative_residual(d.E * F1 - np.exp(d.p) * F2, F3)
            gap = np.abs(theta_residual - relative_residual(lhs, rhs))[~flagged]
            extra["fay_agreement"] = float(gap.max()) if gap.size else 0.0
            if extra["fay_agreement"] > FAY_AGREEMENT:
                logger.warning(f"fay and fay1 residuals disagree by {extra['fay_agreement']:.3e}")

    columns = {f"z{j}": points[:, j] for j in range(points.shape[1])}
    return ResidualReport.from_sides(variant, lhs, rhs, flagged, columns, extra)


def _pure_theta(d: SecancyData) -> bool:
    return (
        d.B is not None
        and d.V is not None
        and isinstance(d.tau, ThetaTau)
        and isinstance(d.tau_A, ThetaTau)
        and d.tau.gauge.is_trivial
        and d.tau_A.gauge.is_trivial
        and np.allclose(d.tau_A.z0 - d.tau.z0, d.A)
    )


def solve_linear_fit(columns: Sequence[np.ndarray], rhs: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """Least squares with a condition number measured on the equilibrated matrix."""
    matrix = np.stack(columns, axis=1)
    row_scale = np.maximum(np.max(np.abs(np.column_stack([matrix, rhs])), axis=1), 1e-300)
    scaled = matrix / row_scale[:, None]
    col_scale = np.maximum(np.linalg.norm(scaled, axis=0), 1e-300)
    singular = linalg.svd(scaled / col_scale, compute_uv=False)
    condition = float(singular[0] / singular[-1]) if singular[-1] > 0 else float("inf")
    if condition > MAX_CONDITION:
        raise DegenerateConfigurationError(f"Constant fit is ill-conditioned (condition {condition:.3e})", condition)
    solution, *_ = linalg.lstsq(scaled, rhs / row_scale)
    residual = float(np.max(relative_residual(matrix @ solution, rhs)))
    return solution, condition, residual


def fit_constants(d: SecancyData, fit_points: Sequence, variant: str = "fay1") -> FitResult:
    """
    Fit the constants of a secancy identity by linear least squares.

    The continuous identities are linear in (E, e^p). The discrete ones are
    linear in (e^{2pW}, e^{pW - E}); p.W is taken from the principal square
    root branch and E follows on the same branch.

    Args:
        d: Secancy data (constants ignored)
        fit_points: At least two points avoiding zeros of every factor
        variant: fay, fay1, laxdd_pd, fay0 or fay2

    Returns:
        FitResult with values {'p', 'E'} (or {'pW', 'E'})

    Raises:
        DegenerateConfigurationError: If the condition number exceeds 1e8
    """
    points = _points(d, fit_points)
    if points.shape[0] < 2:
        raise ValueError("fit_constants needs at least two fit points")
    if variant in CONTINUOUS_VARIANTS:
        X1, X2, X3 = _fay_terms(d, points) if variant == "fay" else _fay1_terms(d, points)
        (E, exp_p), condition, residual = solve_linear_fit([X1, -X2], X3)
        values = {"p": complex(np.log(exp_p)), "E": complex(E)}
    elif variant in DISCRETE_VARIANTS:
        L, M, N = _fay0_terms(d, points) if variant == "fay0" else _fay2_terms(d, points)
        (alpha, beta), condition, residual = solve_linear_fit([M, N], L)
        pW = 0.5 * np.log(alpha)
        values = {"pW": complex(pW), "E": complex(pW - np.log(beta))}
    else:
        raise ValueError(f"Unknown fit variant '{variant}'")
    logger.debug(f"fit_constants({variant}): {values}, condition {condition:.3e}, fit residual {residual:.2e}")
    return FitResult(values, condition, residual)


def secancy_holdout(
    d: SecancyData,
    rng: np.random.Generator,
    variant: str = "fay1",
    fit_count: int = 2,
    holdout: int = 100,
    spread: float = 0.4,
) -> Tuple[SecancyData, FitResult, ResidualReport]:
    """Fit constants on a few points, then evaluate the identity at fresh ones."""
    fit = fit_constants(d, d.sample(rng, fit_count, spread), variant)
    fitted = d.with_constants(fit.p, fit.E)
    fresh = d.sample(rng, holdout, spread)
    if variant in DISCRETE_VARIANTS:
        from residuals.discrete import residual_discrete

        report = residual_discrete(fitted, fresh, variant)
    else:
        report = residual_secancy(fitted, fresh, variant)
    report.extra["condition"] = fit.condition
    return fitted, fit, report
