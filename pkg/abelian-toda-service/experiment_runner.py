"""
Experiment Runner for the abelian Toda suites

Orchestrates one named suite end to end: builds the models from the validated
configuration, evaluates every residual, compares each against its configured
tolerance and writes the CSV tables and summary.json into the output
directory. Reruns with the same configuration and seed give identical table
bodies.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd
import yaml

from config_manager import ConfigManager
from config_schema import SUITES
from exceptions import NoSimplePoleSolutionError
from psdiff.commuting import dependency_and_commute
from psdiff.dressing import continuous_waves, dress, orbit_origin, wave_window
from psdiff.dual import dual_pairing
from psdiff.lax import lax_check
from residuals.discrete import bdhe_model, discrete_secancy_constants, residual_discrete
from residuals.on_divisor import on_divisor_checks
from residuals.report import ResidualReport, relative_residual
from residuals.secancy import SecancyData, fit_constants, residual_secancy, secancy_holdout
from residuals.toda import fit_toda_gauge, residual_toda2d, toda_grid
from residuals.trisecant import trisecant_rank
from rsdyn.correspondence import correspondence_check
from rsdyn.integrator import integrate, time_reversal_defect
from rsdyn.particles import ParticleState
from special.oracles import brute_force_theta, lambert_eta1, lambert_zeta
from special.theta import Characteristic, RiemannMatrix, riemann_theta, theta_char
from special.weierstrass import EllipticLattice
from taumodels.base_model import monodromy_check
from taumodels.elliptic_tau import EllipticPolynomialTau, SigmaTau
from taumodels.theta_tau import ThetaTau
from taumodels.trajectories import PolynomialPath
from utils.reporting_utils import ReportingUtils
from waverec.elliptic_wave import ContinuousEllipticWave, DiscreteEllipticWave
from waverec.first_step import verify_first_step
from waverec.recursion import solve_recursion_elliptic
from waverec.residues import verify_discrete_residues

logger = logging.getLogger(__name__)

NEGATIVE_CONTROL_FLOOR = 1e-4
DEGRADATION_FACTOR = 1e3
ORACLE_POINTS = 100
DIVISOR_CLEARANCE = 0.15

REQUIRED_SECTIONS = {
    "special-oracle": (),
    "identities": ("secancy",),
    "on-divisor": ("secancy", "rsdyn"),
    "waverec": ("secancy", "rsdyn"),
    "psdiff": ("secancy", "rsdyn"),
    "rsdyn": ("rsdyn",),
    "discrete": ("secancy",),
    "trisecant-g2": (),
}


@dataclass
class Check:
    """
    One asserted comparison of a suite.

    kind 'max' passes when value < tolerance (residuals), 'min' when
    value > tolerance (negative controls), 'skip' is never evaluated.
    """

    name: str
    value: Optional[float]
    tolerance: float
    kind: str = "max"
    row: Optional[Dict[str, Any]] = None

    @property
    def status(self) -> str:
        if self.kind == "skip":
            return "skipped"
        if self.value is None or not np.isfinite(self.value):
            return "failed"
        if self.kind == "min":
            return "passed" if self.value > self.tolerance else "failed"
        return "passed" if self.value < self.tolerance else "failed"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "kind": self.kind,
            "passed": self.status == "passed",
            "status": self.status,
        }


@dataclass
class SuiteResult:
    suite: str
    checks: List[Check] = field(default_factory=list)
    tables: Dict[str, Path] = field(default_factory=dict)
    summary_path: Optional[Path] = None

    @property
    def failed(self) -> List[Check]:
        return [check for check in self.checks if check.status == "failed"]

    @property
    def passed(self) -> bool:
        return not self.failed


def _worst_row(report: ResidualReport) -> Dict[str, Any]:
    valid = report.valid
    if not len(valid):
        return {}
    row = valid.loc[valid["residual"].idxmax()]
    return {str(k): ReportingUtils.to_jsonable(v) for k, v in row.items()}


class ExperimentRunner:
    """
    Runs the named experiment suites.

    Each suite method appends checks and tables to the current SuiteResult;
    run() writes the tables and summary and returns the result.
    """

    def __init__(self, config_manager: ConfigManager, output_dir: Optional[Path] = None):
        """
        Initialize the experiment runner.

        Args:
            config_manager: Configuration manager instance
            output_dir: Root directory for reports (defaults to the configured output_dir)
        """
        self.config_manager = config_manager
        self.config = config_manager.validate_config()
        self.output_dir = Path(output_dir or self.config.output_dir)
        self.tol = self.config.tolerances
        self.numerics = self.config.numerics
        self.lattice = EllipticLattice(self.config.lattice.omega1, self.config.lattice.omega2)
        self.B = RiemannMatrix(self.config.riemann_entries)
        self._result: Optional[SuiteResult] = None
        self._frames: Dict[str, pd.DataFrame] = {}

        self.suites: Dict[str, Callable[[np.random.Generator], None]] = {
            "special-oracle": self.run_special_oracle,
            "identities": self.run_identities,
            "on-divisor": self.run_on_divisor,
            "waverec": self.run_waverec,
            "psdiff": self.run_psdiff,
            "rsdyn": self.run_rsdyn,
            "discrete": self.run_discrete,
            "trisecant-g2": self.run_trisecant,
        }

    def check_requirements(self, suite: str) -> None:
        """
        Fail early when the configuration cannot drive the suite.

        Raises:
            ValueError: If the suite is unknown or a section it needs is missing
        """
        if suite not in self.suites:
            raise ValueError(f"Unknown suite '{suite}'; expected one of {', '.join(SUITES)}")
        missing = [name for name in REQUIRED_SECTIONS[suite] if getattr(self.config, name) is None]
        if missing:
            raise ValueError(f"Suite {suite} needs configuration section(s): {', '.join(missing)}")

    def run(self, suite: str) -> SuiteResult:
        """
        Execute one suite and write its reports.

        Args:
            suite: Suite name

        Returns:
            SuiteResult with every check and the written table paths

        Raises:
            ValueError: If the suite name is unknown or the config lacks a section it needs
        """
        self.check_requirements(suite)
        logger.info(f"Running suite {suite} with seed {self.config.seed}")
        self._result = SuiteResult(suite)
        self._frames = {}
        self.suites[suite](np.random.default_rng(self.config.seed))

        suite_dir = self.output_dir / suite
        suite_dir.mkdir(parents=True, exist_ok=True)
        for name, frame in self._frames.items():
            self._result.tables[name] = ReportingUtils.write_table(
                frame, suite_dir / f"{name}.csv", seed=self.config.seed
            )
        summary = {
            "suite": suite,
            "seed": self.config.seed,
            "config": self.config.model_dump(),
            "checks": [check.to_dict() for check in self._result.checks],
            "tables": {name: path.name for name, path in self._result.tables.items()},
            "passed": self._result.passed,
        }
        self._result.summary_path = ReportingUtils.write_summary(summary, suite_dir / "summary.json")

        for check in self._result.failed:
            logger.error(f"{suite}: check {check.name} failed with {check.value} (tolerance {check.tolerance:.1e})")
        logger.info(f"Suite {suite}: {len(self._result.checks)} checks, {len(self._result.failed)} failed")
        return self._result

    # Recording helpers

    def _check(self, name: str, value: Optional[float], tolerance: float, kind: str = "max", row=None) -> Check:
        check = Check(name, None if value is None else float(value), float(tolerance), kind, row)
        self._result.checks.append(check)
        logger.info(f"{name}: {check.status} ({value} vs {tolerance:.1e})")
        return check

    def _report(self, name: str, report: ResidualReport, tolerance: float) -> Check:
        self._frames[name] = report.table
        return self._check(name, report.max_residual, tolerance, row=_worst_row(report))

    def _table(self, name: str, frame: pd.DataFrame) -> None:
        self._frames[name] = frame

    def _secancy(self):
        section = self.config.secancy
        if section is None:
            raise ValueError("This suite needs a 'secancy' section in the configuration")
        return section

    def _rsdyn(self):
        section = self.config.rsdyn
        if section is None:
            raise ValueError("This suite needs an 'rsdyn' section in the configuration")
        return section

    def _scalars(self):
        """First entries of A, U, V, W, z0 for the elliptic suites."""
        s = self._secancy()
        z0 = s.z0[0] if s.z0 else 0j
        return s.A[0], s.U[0], s.V[0], s.W[0], z0

    def _z0_vector(self) -> List[complex]:
        s = self._secancy()
        return list(s.z0) if s.z0 else [0j] * len(s.A)

    def _single_particle(self):
        section = self._rsdyn()
        return section.positions[0], section.velocities[0]

    # Suites

    def run_special_oracle(self, rng: np.random.Generator) -> None:
        """Theta and Weierstrass functions against independent sums, plus exact monodromy."""
        B, g = self.B, self.B.g
        tolerance = self.numerics.theta_tolerance
        cap = self.numerics.theta_radius_cap
        count = ORACLE_POINTS if g < 3 else 20
        points = rng.uniform(-0.5, 0.5, (count, g)) + 1j * rng.uniform(-0.3, 0.3, (count, g))

        values = np.atleast_1d(riemann_theta(points, B, tolerance=tolerance, radius_cap=cap))
        oracle = np.array([brute_force_theta(z, B.entries) for z in points])
        rel = relative_residual(values, oracle)
        frame = pd.DataFrame({f"z{j}": points[:, j] for j in range(g)})
        frame["theta"], frame["oracle"], frame["residual"] = values, oracle, rel
        self._table("theta_oracle", frame)
        self._check("theta_vs_box_sum", rel.max(), self.tol.special)

        eps, delta = np.full(g, 0.5), np.zeros(g)
        char_points = points[:10]
        char_values = np.atleast_1d(theta_char(Characteristic(eps, delta), char_points, B, tolerance=tolerance))
        char_oracle = np.array([brute_force_theta(z, B.entries, eps, delta) for z in char_points])
        self._check("theta_char_vs_box_sum", relative_residual(char_values, char_oracle).max(), self.tol.special)

        integer = max(
            relative_residual(np.atleast_1d(riemann_theta(points + np.eye(g)[j], B)), values).max() for j in range(g)
        )
        self._check("theta_integer_shift", integer, self.tol.special)
        quasi = 0.0
        for j in range(g):
            column = B.column(j)
            factor = np.exp(1j * np.pi * column[j] + 2j * np.pi * points[:, j])
            shifted = np.atleast_1d(riemann_theta(points + column, B)) * factor
            quasi = max(quasi, relative_residual(shifted, values).max())
        self._check("theta_quasi_periodicity", quasi, self.tol.special)

        lattice = self.lattice
        self._check("legendre_relation", lattice.legendre_residual, self.tol.special)
        self._check(
            "eta1_vs_lambert",
            relative_residual(lattice.eta1, lambert_eta1(lattice.omega1, lattice.omega2))[()],
            self.tol.special,
        )
        zs = points[:20, 0]
        lambert = np.array([lambert_zeta(z, lattice.omega1, lattice.omega2) for z in zs])
        self._check("zeta_vs_lambert", relative_residual(lattice.zeta(zs), lambert).max(), self.tol.special)

        records = []
        V = self._secancy().V if self.config.secancy is not None else [0.31 + 0.05j] * g
        models = {
            "theta": ThetaTau(B, {"t": list(V)}),
            "sigma": SigmaTau(lattice, {"nu": complex(V[0])}),
        }
        for label, model in models.items():
            for j, generator in enumerate(model.lattice_generators):
                _, _, residual = monodromy_check(model, generator, {"t": 0.1, "nu": 0.3}, rng)
                records.append({"model": label, "generator": j, "residual": residual})
        monodromy = pd.DataFrame.from_records(records)
        self._table("monodromy", monodromy)
        self._check("tau_monodromy", monodromy["residual"].max(), self.tol.monodromy)

    def run_identities(self, rng: np.random.Generator) -> None:
        """Continuous secancy identity with fitted constants, its Lax form and the 2D Toda equation."""
        s = self._secancy()
        z0 = self._z0_vector()
        d = SecancyData.from_theta(self.B, s.U, s.A, s.V, z0=z0)

        fitted, fit, report = secancy_holdout(d, rng, "fay1", fit_count=2, holdout=ORACLE_POINTS)
        self._report("fay1_holdout", report, self.tol.identities)
        if "fay_agreement" in report.extra:
            self._check("fay_fay1_agreement", report.extra["fay_agreement"], self.tol.fay_agreement)
        self._check("fit_condition", fit.condition, 1e8)

        theta_form = residual_secancy(fitted, fitted.sample(rng, ORACLE_POINTS), "fay")
        self._report("fay_holdout", theta_form, self.tol.identities)
        control = residual_secancy(fitted.with_constants(fit.p, fit.E + 0.5), fitted.sample(rng, 50), "fay1")
        self._check("fay1_wrong_constants", control.max_residual, NEGATIVE_CONTROL_FLOOR, kind="min")

        lax = residual_secancy(fitted, fitted.sample(rng, 30), "laxdd_pd")
        self._report("laxdd", lax, self.tol.lax)

        model = ThetaTau(self.B, {"n": list(s.U), "xi": list(s.A), "eta": list(s.V)}, z0=z0)
        gauged, _ = fit_toda_gauge(model, toda_grid(rng, 10, self.B.g))
        self._report("toda2d", residual_toda2d(gauged, toda_grid(rng, ORACLE_POINTS, self.B.g), (0, 1)), self.tol.toda)
        ungauged = residual_toda2d(model, toda_grid(rng, 20, self.B.g))
        self._check("toda2d_ungauged", ungauged.max_residual, NEGATIVE_CONTROL_FLOOR, kind="min")

    def _lattice_zeros(self, shift: complex, rows=range(-2, 2), cols=range(-2, 3)) -> np.ndarray:
        return np.array([[self.lattice.lattice_point(a, b) - shift] for a in rows for b in cols])

    def run_on_divisor(self, rng: np.random.Generator) -> None:
        """Relations restricted to the zero divisor of tau."""
        A, U, V, W, z0 = self._scalars()
        x0, v = self._single_particle()

        path = PolynomialPath([x0], [v])
        t = float(self.numerics.t_span[0])
        free = SecancyData(EllipticPolynomialTau(self.lattice, path), None, U=[U], time=t)
        report = on_divisor_checks(free, path.positions(t).reshape(1, 1), "rs")
        self._frames["rs_free"] = report.table
        self._check("rs_free_particle", report.max_absolute, self.tol.rs, row=_worst_row(report))

        d = SecancyData.from_sigma(self.lattice, [U], [A], [V], z0=z0)
        fit = fit_constants(d, d.sample(rng, 3), "fay1")
        zeros = self._lattice_zeros(z0)
        self._report("te12", on_divisor_checks(d.with_constants(fit.p, fit.E), zeros, "te12"), self.tol.on_divisor)

        pW, E = discrete_secancy_constants(self.lattice, A, V, W)
        discrete = SecancyData.from_sigma_discrete(self.lattice, A, V, W, z0=z0, pW=pW, E=E)
        f5d = on_divisor_checks(discrete, zeros, "f5d")
        self._frames["f5d"] = f5d.table
        self._check("f5d_triple_ratio", f5d.extra["max_ratio_defect"], self.tol.on_divisor)
        self._report("tauA_consistency", on_divisor_checks(discrete, zeros, "tauA_consistency"), self.tol.on_divisor)

        wave = ContinuousEllipticWave(self.lattice, U, x0, v, count=self.numerics.contour_points)
        moving = SecancyData(wave.tau_model(), None, U=[U], time=t)
        points = self._lattice_zeros(-wave.positions(t)[0])
        residues = on_divisor_checks(moving, points, "residues", wave=wave)
        self._report("wave_residues", residues, self.tol.discrete_residues)

    def run_waverec(self, rng: np.random.Generator) -> None:
        """First recursion step, the elliptic recursion solver and the discrete residue checks."""
        A, U, V, W, z0 = self._scalars()
        s = self._secancy()

        theta_model = ThetaTau(self.B, {"t": list(s.V)}, z0=self._z0_vector())
        first = verify_first_step(theta_model, self.B.column(0), list(s.U), rng=rng, samples=60)
        self._report("first_step", first, self.tol.first_step)
        self._check("first_step_normalized_B1", first.extra.get("normalized_B1"), self.tol.monodromy)

        section = self._rsdyn()
        kappa = section.kappa if section.kappa is not None else U
        state = ParticleState(section.positions, section.velocities, self.lattice, kappa)
        lo, hi = self.numerics.recursion_span
        nodes = np.linspace(lo, hi, self.numerics.recursion_nodes)
        depth = self.numerics.recursion_depth

        trajectory = integrate(state, (lo, hi), tol=section.integrator_tolerance, nodes=nodes)
        series = solve_recursion_elliptic(EllipticPolynomialTau(self.lattice, trajectory), U, depth, nodes, rng)
        series.save(self.output_dir / "waverec" / "wave_series.json")
        diagnostics = series.diagnostics
        holdout = pd.DataFrame({"order": list(diagnostics["holdout"]), "residual": list(diagnostics["holdout"].values())})
        self._table("recursion_holdout", holdout)
        self._check("recursion_holdout", holdout["residual"].max(), self.tol.recursion_holdout)
        self._check("pole_dynamics", diagnostics["pole_dynamics"], self.tol.rs)
        self._check("monodromy_2omega1", np.max(np.abs(series.monodromy["2omega1"])), self.tol.monodromy)
        self._check("monodromy_drift_2omega2", diagnostics["monodromy_drift"]["2omega2"], self.tol.t_independence)

        perturbed = integrate(state, (lo, hi), tol=section.integrator_tolerance, nodes=nodes, coupling=1.01)
        try:
            solve_recursion_elliptic(EllipticPolynomialTau(self.lattice, perturbed), U, depth, nodes, rng)
            control = None
        except NoSimplePoleSolutionError as e:
            control = e.residual
        self._check("recursion_perturbed_dynamics", control, NEGATIVE_CONTROL_FLOOR, kind="min")

        data = SecancyData.from_sigma_discrete(self.lattice, A, V, W, z0=z0)
        wave = DiscreteEllipticWave(self.lattice, V, W, z0, count=self.numerics.contour_points)
        levels = [0.0, 1.0, 2.0]
        report = verify_discrete_residues(
            data, wave, levels, lambda nu: self._lattice_zeros(z0 + nu * V, (-1, 0), (-1, 0, 1))
        )
        self._report("discrete_residues", report, self.tol.discrete_residues)

    def _continuous_origin(self, wave, rng, window, times, clearance) -> complex:
        poles = [wave.positions(t)[0] for t in times] + [wave.positions(t)[0] - wave.U for t in times]
        lo, hi = window
        return orbit_origin(self.lattice, poles, wave.U, lo, hi, rng, clearance)

    def _discrete_origin(self, wave, rng, window, levels, clearance=0.05) -> complex:
        poles = [-wave.z0 - nu * wave.V - r * (wave.V - wave.W) for nu in levels for r in range(3)]
        lo, hi = window
        return orbit_origin(self.lattice, poles, wave.W + wave.V, lo - 1, hi + 1, rng, clearance)

    def run_psdiff(self, rng: np.random.Generator) -> None:
        """Dressing, Lax and dual identities and the commuting ring, continuous and discrete."""
        A, U, V, W, z0 = self._scalars()
        x0, v = self._single_particle()
        depth = self.numerics.depth
        t = float(self.numerics.t_span[0]) + 0.2
        wave = ContinuousEllipticWave(self.lattice, U, x0, v, count=self.numerics.contour_points)
        discrete = DiscreteEllipticWave(self.lattice, V, W, z0, count=self.numerics.contour_points)

        lo, hi = wave_window(depth, 1, margin=2)
        origin = self._continuous_origin(wave, rng, (lo, hi), [t], DIVISOR_CLEARANCE)
        dressing = dress(continuous_waves(wave, origin, U, t, depth, lo, hi))
        self._check("dressing_eigen_residual", dressing.residual, self.tol.dressing)

        origin = self._continuous_origin(wave, rng, wave_window(depth, 3, margin=3), [t], DIVISOR_CLEARANCE)
        self._report("lax_continuous", lax_check(wave, origin, depth, time=t, powers=(1, 2, 3)), self.tol.lax)
        origin = self._discrete_origin(discrete, rng, wave_window(depth, 3, margin=3), [0.0])
        lax = lax_check(discrete, origin, depth, variant="discrete", time=0.0, powers=(1, 2, 3))
        self._report("lax_discrete", lax, self.tol.lax)

        origin = self._continuous_origin(wave, rng, wave_window(depth, 4, margin=2), [t], 0.2)
        self._dual_checks("dual_continuous", dual_pairing(wave, origin, depth, time=t))
        origin = self._discrete_origin(discrete, rng, wave_window(depth, 4, margin=2), [0.0])
        self._dual_checks("dual_discrete", dual_pairing(discrete, origin, depth, variant="discrete", time=0.0))

        times = [t + 0.1 * j for j in range(4)]
        window = wave_window(depth, 3, margin=0)
        points = [self._continuous_origin(wave, rng, window, times, 0.1) for _ in range(8)]
        origin = self._continuous_origin(wave, rng, wave_window(depth, 3, margin=3), times[:1], 0.1)
        self._ring_checks("ring_continuous", dependency_and_commute(wave, points, times, depth, origin=origin))

        levels = [0.0, 1.0, 2.0]
        points = [self._discrete_origin(discrete, rng, window, levels) for _ in range(8)]
        origin = self._discrete_origin(discrete, rng, wave_window(depth, 3, margin=3), levels[:1])
        ring = dependency_and_commute(discrete, points, levels, depth, variant="discrete", origin=origin)
        self._ring_checks("ring_discrete", ring)

    def _dual_checks(self, name: str, pairing) -> None:
        worst = pairing.report.extra["max_by_relation"]
        self._frames[name] = pairing.report.table
        self._check(f"{name}_pairing", worst["pairing"], self.tol.pairing)
        self._check(f"{name}_adjoint", worst["adjoint"], self.tol.lax)

    def _ring_checks(self, name: str, ring) -> None:
        self._frames[name] = ring.report.table
        worst = ring.report.extra["max_by_relation"]
        commutators = [value for key, value in worst.items() if key.startswith("commutator")]
        eigen = [value for key, value in worst.items() if key.startswith("eigen")]
        self._check(f"{name}_constants_variation", ring.fit.variation, self.tol.t_independence)
        self._check(f"{name}_commutators", max(commutators, default=0.0), self.tol.commutator)
        self._check(f"{name}_eigen", max(eigen, default=0.0), self.tol.commutator)
        for power, operator in ring.operators.items():
            self._table(f"{name}_operator_{power}", operator.to_frame())

    def run_rsdyn(self, rng: np.random.Generator) -> None:
        """RS trajectories against the divisor relation of their elliptic tau function."""
        section = self._rsdyn()
        U = self._scalars()[1] if self.config.secancy is not None else section.kappa
        kappa = section.kappa if section.kappa is not None else U
        if kappa is None:
            raise ValueError("rsdyn needs kappa or a secancy section providing U")
        state = ParticleState(section.positions, section.velocities, self.lattice, kappa)
        lo, hi = self.numerics.t_span
        nodes = np.linspace(lo, hi, 6)

        trajectory = integrate(state, (lo, hi), section.integrator_tolerance, nodes, section.coupling)
        self._table("trajectory", trajectory.table)
        good = correspondence_check(trajectory, self.lattice, kappa, U)
        self._report("rs_correspondence", good, self.tol.rs)
        self._check("zero_tracking", good.extra["zero_tracking"], self.tol.zero_tracking)
        self._check("velocity_sum_drift", trajectory.velocity_sum_drift(), self.tol.rs)
        self._check("time_reversal", time_reversal_defect(state, hi - lo, section.integrator_tolerance), self.tol.rs)

        if state.x.size > 1:
            perturbed = integrate(state, (lo, hi), section.integrator_tolerance, nodes, 1.01 * section.coupling)
            bad = correspondence_check(perturbed, self.lattice, kappa, U, track=False)
            ratio = bad.max_residual / max(good.max_residual, np.finfo(float).tiny)
            self._check("rs_perturbed_coupling_ratio", ratio, DEGRADATION_FACTOR, kind="min")

    def run_discrete(self, rng: np.random.Generator) -> None:
        """BDHE with the closed-form gauge, the discrete secancy identity and the lattice Lax equation."""
        A, U, V, W, z0 = self._scalars()
        model = bdhe_model(self.lattice, V, W, A, z0=z0)
        samples = 0.4 * (rng.uniform(-1, 1, (50, 1)) + 1j * rng.uniform(-1, 1, (50, 1)))
        self._report("bdhe", residual_discrete(model, samples, "bdhe"), self.tol.bdhe)

        pW, E = discrete_secancy_constants(self.lattice, A, V, W)
        d = SecancyData.from_sigma_discrete(self.lattice, A, V, W, z0=z0, pW=pW, E=E)
        self._report("fay2", residual_discrete(d, d.sample(rng, 50), "fay2"), self.tol.identities)
        wrong = residual_discrete(d.with_constants(pW, E + 0.5), d.sample(rng, 50), "fay2")
        self._check("fay2_wrong_constants", wrong.max_residual, NEGATIVE_CONTROL_FLOOR, kind="min")

        s = self._secancy()
        theta_data = SecancyData.from_theta_discrete(self.B, s.A, s.V, s.W, z0=self._z0_vector())
        _, _, fay0 = secancy_holdout(theta_data, rng, "fay0", fit_count=3, holdout=60)
        self._report("fay0_holdout", fay0, self.tol.identities)

        lax = residual_discrete(d, d.sample(rng, 30), "laxddd")
        self._report("laxddd", lax, self.tol.lax)
        self._check("light_cone_agreement", lax.extra["light_cone_agreement"], self.tol.light_cone)

    def run_trisecant(self, rng: np.random.Generator) -> None:
        """Case (ii) Kummer collinearity on externally supplied genus-two Jacobian data."""
        section = self.config.trisecant
        if not section.enabled or section.data_file is None or not Path(section.data_file).exists():
            logger.warning("Trisecant suite skipped: no period-matrix data file enabled")
            self._check("trisecant_jacobian", None, self.tol.trisecant, kind="skip")
            self._check("trisecant_random", None, NEGATIVE_CONTROL_FLOOR, kind="skip")
            return

        with open(section.data_file, "r") as f:
            data = yaml.safe_load(f)
        B = RiemannMatrix.from_pairs(data["B"])
        U = np.array([complex(*pair) for pair in data["U"]])
        V = np.array([complex(*pair) for pair in data["V"]])
        frames, largest = [], 0.0
        for j in range(int(data.get("samples", 5))):
            Z = 0.3 * (rng.uniform(-1, 1, B.g) + 1j * rng.uniform(-1, 1, B.g))
            table, worst = trisecant_rank(B, [Z, Z + U], case="ii", direction=V)
            frames.append(table.assign(sample=j))
            largest = max(largest, worst)
        self._table("trisecant_minors", pd.concat(frames, ignore_index=True))
        self._check("trisecant_jacobian", largest, self.tol.trisecant)

        Z = 0.3 * (rng.uniform(-1, 1, B.g) + 1j * rng.uniform(-1, 1, B.g))
        U_random = 0.3 * (rng.uniform(-1, 1, B.g) + 1j * rng.uniform(-1, 1, B.g))
        V_random = rng.uniform(-1, 1, B.g) + 1j * rng.uniform(-1, 1, B.g)
        _, control = trisecant_rank(B, [Z, Z + U_random], case="ii", direction=V_random)
        self._check("trisecant_random", control, NEGATIVE_CONTROL_FLOOR, kind="min")
