"""
Pydantic schema for experiment configuration files.

Complex numbers are written as two-element lists [re, im] (a bare number is
accepted for real values). Every tolerance must be positive; unknown keys are
rejected so a misspelled field is reported by name.
"""

from pathlib import Path
from typing import Annotated, Any, List, Literal, Optional, Tuple

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PositiveFloat, field_validator, model_validator

SCHEMA_VERSION = 1

SUITES = (
    "special-oracle",
    "identities",
    "on-divisor",
    "waverec",
    "psdiff",
    "rsdyn",
    "discrete",
    "trisecant-g2",
)


def _to_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("complex value must be a pair [re, im]")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, bool):
        raise ValueError("complex value must be a number or a pair [re, im]")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    raise ValueError("complex value must be a number or a pair [re, im]")


ComplexPair = Annotated[complex, BeforeValidator(_to_complex)]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LatticeConfig(_Section):
    """Half-periods of the elliptic lattice."""

    omega1: ComplexPair
    omega2: ComplexPair

    @model_validator(mode="after")
    def check_orientation(self) -> "LatticeConfig":
        if self.omega1 == 0 or (self.omega2 / self.omega1).imag <= 0:
            raise ValueError("omega2/omega1 must have positive imaginary part")
        return self


class NumericsConfig(_Section):
    depth: int = Field(default=8, ge=1)
    theta_tolerance: PositiveFloat = 1e-14
    theta_radius_cap: PositiveFloat = 60.0
    fd_step: PositiveFloat = 1e-4
    fd_step_second: PositiveFloat = 2e-3
    t_nodes: int = Field(default=64, ge=4)
    t_span: Tuple[float, float] = (0.0, 1.0)
    collocation_far_points: int = Field(default=8, ge=0)
    contour_points: int = Field(default=64, ge=8)
    recursion_depth: int = Field(default=4, ge=1)
    recursion_nodes: int = Field(default=17, ge=2)
    recursion_span: Tuple[float, float] = (0.0, 0.5)

    @field_validator("t_span", "recursion_span")
    @classmethod
    def check_span(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if value[1] <= value[0]:
            raise ValueError("time span must be increasing")
        return value


class ToleranceConfig(_Section):
    """One positive tolerance per asserted check."""

    identities: PositiveFloat = 1e-10
    fay_agreement: PositiveFloat = 1e-10
    bdhe: PositiveFloat = 1e-10
    light_cone: PositiveFloat = 1e-12
    rs: PositiveFloat = 1e-6
    zero_tracking: PositiveFloat = 1e-8
    first_step: PositiveFloat = 1e-8
    recursion_holdout: PositiveFloat = 1e-8
    monodromy: PositiveFloat = 1e-9
    t_independence: PositiveFloat = 1e-7
    dressing: PositiveFloat = 1e-9
    lax: PositiveFloat = 1e-7
    pairing: PositiveFloat = 1e-9
    commutator: PositiveFloat = 1e-8
    discrete_residues: PositiveFloat = 1e-7
    trisecant: PositiveFloat = 1e-6
    special: PositiveFloat = 1e-12
    toda: PositiveFloat = 1e-8
    on_divisor: PositiveFloat = 1e-8


class SecancyConfig(_Section):
    """Secancy vectors, one complex entry per dimension of the torus."""

    A: List[ComplexPair] = Field(min_length=1)
    U: List[ComplexPair] = Field(min_length=1)
    V: List[ComplexPair] = Field(min_length=1)
    W: List[ComplexPair] = Field(min_length=1)
    z0: Optional[List[ComplexPair]] = None

    @model_validator(mode="after")
    def check_nonzero(self) -> "SecancyConfig":
        if len({len(self.A), len(self.U), len(self.V), len(self.W), len(self.z0 or self.A)}) != 1:
            raise ValueError("A, U, V, W and z0 must have the same length")
        if all(a == 0 for a in self.A) and any(v != 0 for v in self.V):
            raise ValueError("A = 0 requires V = 0")
        if all(u == 0 for u in self.U):
            raise ValueError("U must be nonzero")
        return self


class RsdynConfig(_Section):
    positions: List[ComplexPair] = Field(min_length=1)
    velocities: List[ComplexPair] = Field(min_length=1)
    kappa: Optional[ComplexPair] = None
    coupling: float = 1.0
    integrator_tolerance: PositiveFloat = 1e-10

    @model_validator(mode="after")
    def check_lengths(self) -> "RsdynConfig":
        if len(self.positions) != len(self.velocities):
            raise ValueError("positions and velocities must have the same length")
        return self


class TrisecantConfig(_Section):
    enabled: bool = False
    data_file: Optional[Path] = None


class ExperimentConfig(_Section):
    """Validated experiment configuration."""

    schema_version: Literal[1]
    seed: int = Field(ge=0, lt=2**64)
    suite: Optional[str] = None
    output_dir: Path = Path("results")
    lattice: LatticeConfig
    riemann_matrix: Optional[List[List[ComplexPair]]] = None
    numerics: NumericsConfig = Field(default_factory=NumericsConfig)
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    secancy: Optional[SecancyConfig] = None
    rsdyn: Optional[RsdynConfig] = None
    trisecant: TrisecantConfig = Field(default_factory=TrisecantConfig)

    @field_validator("suite")
    @classmethod
    def check_suite(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in SUITES:
            raise ValueError(f"unknown suite '{value}'; expected one of {', '.join(SUITES)}")
        return value

    @field_validator("riemann_matrix")
    @classmethod
    def check_square(cls, value: Optional[List[List[complex]]]) -> Optional[List[List[complex]]]:
        if value is not None and any(len(row) != len(value) for row in value):
            raise ValueError("riemann_matrix must be square")
        return value

    @model_validator(mode="after")
    def check_dimensions(self) -> "ExperimentConfig":
        if self.secancy is not None and len(self.secancy.A) != len(self.riemann_entries):
            raise ValueError(
                f"secancy vectors have {len(self.secancy.A)} entries but the Riemann matrix is "
                f"{len(self.riemann_entries)} x {len(self.riemann_entries)}"
            )
        return self

    @property
    def riemann_entries(self) -> List[List[complex]]:
        return self.riemann_matrix if self.riemann_matrix is not None else [[1j]]
