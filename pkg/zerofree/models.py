"""Pydantic models for schedules, region parameters, run config and presets."""

import math
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

THETA_MIN = 1.8469


class MembershipReport(BaseModel):
    """Outcome of the P_n membership test."""
    is_member: bool
    first_negative_index: Optional[int] = None
    a1_exceeds_a0: bool

    def reason(self) -> str:
        if self.is_member:
            return "member"
        parts = []
        if self.first_negative_index is not None:
            parts.append(f"a_{self.first_negative_index} < 0")
        if not self.a1_exceeds_a0:
            parts.append("a_1 <= a_0")
        return ", ".join(parts)


class AnnealSchedule(BaseModel):
    """Annealing schedule; M defaults to 300 trials per unit degree."""
    model_config = ConfigDict(populate_by_name=True)

    B: float = Field(150.0, gt=0)
    Z0: float = Field(12.0, gt=0)
    dZ: float = Field(1.0, gt=0)
    Kz: int = Field(10, ge=1)
    M: Optional[int] = Field(None, ge=0)
    S0_init: float = Field(3.0, gt=0)
    lambda_: float = Field(0.03, gt=0, alias="lambda")
    S_min: float = Field(1e-5, gt=0)
    seed: int = Field(0, ge=0, lt=2**64)

    def trials(self, n: int) -> int:
        return 300 * n if self.M is None else self.M


class RegionParams(BaseModel):
    """Inputs of the R0 iteration."""
    T0: float = Field(3.06e10, gt=0)
    t0: float = Field(1e5, gt=0)
    theta: float = 1.85573
    r_init: float = Field(5.0, gt=0)
    R_init: float = Field(5.7, gt=0)
    Delta: float = Field(1e-6, gt=0)
    v: float = Field(5e-7, gt=0)
    eps_eta1: float = Field(1e-3, gt=0)
    epsilon: float = Field(1e-3, gt=0, lt=1)
    n: Optional[int] = Field(None, ge=1)
    max_outer_rounds: int = Field(100, ge=1)
    max_inner_steps: int = Field(200, ge=1)

    @model_validator(mode="after")
    def check_ranges(self):
        if not self.r_init < self.R_init:
            raise ValueError(f"need r_init < R_init, got {self.r_init} >= {self.R_init}")
        if not self.T0 > self.t0:
            raise ValueError(f"need T0 > t0, got T0={self.T0}, t0={self.t0}")
        if not THETA_MIN < self.theta < math.pi:
            raise ValueError(f"theta must lie in ({THETA_MIN}, pi), got {self.theta}")
        return self


class IterationRow(BaseModel):
    """One converged outer round of the R0 iteration."""
    R: float
    r: float
    eta0: float
    eta1: float
    kappa: float
    delta: float
    R0: float

    def as_table(self) -> Dict[str, float]:
        """Columns in the published order, eta values scaled by 1e3."""
        return {
            "R": self.R,
            "r": self.r,
            "eta0_e3": self.eta0 * 1e3,
            "eta1_e3": self.eta1 * 1e3,
            "kappa": self.kappa,
            "delta": self.delta,
            "R0": self.R0,
        }


Subcommand = Literal["anneal", "objective", "r0", "tables", "plot", "sweep"]


class RunConfig(BaseModel):
    """Validated command-line configuration."""
    subcommand: Subcommand
    polynomials: List[Path] = Field(default_factory=list)
    zeros: Optional[Path] = None
    fallback_c30: bool = False
    region: RegionParams = Field(default_factory=RegionParams)
    schedule: AnnealSchedule = Field(default_factory=AnnealSchedule)
    out: Path = Path("out")
    seed: int = Field(0, ge=0, lt=2**64)

    degree: Optional[int] = None
    chains: int = Field(1, ge=1)
    jitter: bool = False
    workers: int = Field(1, ge=1)
    max_failures: Optional[int] = None
    start: Optional[Path] = None

    points: int = Field(2000, ge=2)
    T0_grid: List[float] = Field(default_factory=list)

    tol: float = Field(1.0, ge=0)
    only: Optional[str] = None
    presets: Path = Path("config/presets.json")
    extra_rounds: int = Field(0, ge=0)

    @model_validator(mode="after")
    def check_subcommand(self):
        if self.subcommand == "anneal":
            if self.degree is None and self.start is None:
                raise ValueError("anneal needs --degree or --start")
            if self.degree is not None and self.degree < 2:
                raise ValueError(
                    f"degree {self.degree} admits no member of P_n: a_1 > a_0 needs n >= 2"
                )
        if self.subcommand in ("objective", "r0", "plot", "sweep") and not self.polynomials:
            raise ValueError(f"{self.subcommand} needs a polynomial file")
        if self.subcommand == "sweep" and not self.T0_grid:
            raise ValueError("sweep needs a T0 grid")
        return self


class ConfigurationPreset(BaseModel):
    """A named region configuration bound to a polynomial file."""
    description: str = ""
    polynomial: str
    region: RegionParams
    zeros: Optional[str] = None


class TraceGolden(BaseModel):
    """Published iteration trace with the decimals each column is printed to."""
    configuration: str
    decimals: Dict[str, int]
    rows: List[Dict[str, float]]
    final_R0: float
    next_round_R0: float


class LandauGolden(BaseModel):
    polynomial: str
    objective: float
    objective_tolerance: float
    A: Optional[float] = None
    A_tolerance: float = 1e-10


class VnGolden(BaseModel):
    n: int
    configuration: str
    objective: float
    objective_tolerance: float
    R0: float
    R0_tolerance: float


class CeilingGolden(BaseModel):
    """A configuration whose converged R0 must not exceed a published value."""
    configuration: str
    R0_max: float


class GoldenConfig(BaseModel):
    trace: TraceGolden
    landau: List[LandauGolden]
    vn: List[VnGolden]
    ceilings: List[CeilingGolden] = Field(default_factory=list)


class PresetsConfig(BaseModel):
    """Root of config/presets.json."""
    configurations: Dict[str, ConfigurationPreset]
    golden: GoldenConfig
