from datetime import datetime
from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field


class SweepStatus(str, Enum):
    PENDING = "pending"
    PROCESSING = "processing"
    COMPLETED = "completed"
    FAILED = "failed"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


class ScanStatus(str, Enum):
    PERIODIC = "periodic"
    PREFIX = "prefix"
    ERROR = "error"


# --- Per-sequence reports ---


class KneadReport(BaseModel):
    sequence: str
    period: int
    admissible: bool
    bistable: bool
    tau_sequence: str
    u_poly: str
    determinant: Optional[str] = None
    series: list[str] = Field(default_factory=list)
    t0: Optional[float] = None
    rho: Optional[float] = None
    laps: list[int] = Field(default_factory=list)
    error: Optional[str] = None


class MarkovReport(BaseModel):
    sequence: str
    period: int
    v: list[str]
    w: list[str]
    pi: list[list[int]]
    psi: list[list[int]]
    char_poly: str
    spectral_radius: float


class ThetaReport(BaseModel):
    sequence: str
    period: int
    s: list[int]
    gamma: list[list[int]]
    theta: list[list[int]]
    char_poly: str


class IdentityChecks(BaseModel):
    """One flag per identity, named after the relation it asserts."""

    eta_gamma_zero: bool
    eta_omega_anticommutes: bool
    eta_small_gamma: bool
    theta_matches_determinant: bool
    theta_matches_transition: bool
    spectral_matches_growth: bool
    psi_nonnegative: bool
    eta_theta_commutes: bool
    boundary_ranks: bool
    kneading_oracle: bool

    def all_hold(self) -> bool:
        return all(self.model_dump().values())


class Counterexample(BaseModel):
    sequence: str
    failed: list[str]
    pi: list[list[int]]
    psi: list[list[int]]
    theta: list[list[int]]


class VerificationReport(BaseModel):
    sequence: str
    period: int
    checks: IdentityChecks
    theta_char_poly: str
    psi_char_poly: str
    determinant: str
    t0: Optional[float] = None
    rho_kneading: float
    rho_markov: float
    spectral_check_skipped: bool = False
    rank_eta: int
    rank_boundary: int
    rank_boundary_s: int
    counterexample: Optional[Counterexample] = None

    @property
    def passed(self) -> bool:
        return self.checks.all_hold()


# --- Sweeps ---


class PeriodSummary(BaseModel):
    """Verification results collapsed over one period."""

    period: int
    checked: int
    failures: int
    skipped_spectral: int
    min_rho: Optional[float] = None
    max_rho: Optional[float] = None


class SweepReport(BaseModel):
    max_period: int
    checked: int
    failures: int
    periods: list[PeriodSummary]
    counterexamples: list[VerificationReport] = Field(default_factory=list)

    @property
    def summary(self) -> str:
        return f"{self.checked} sequences checked, {self.failures} failures"


class SweepRequest(BaseModel):
    max_period: int = Field(6, ge=1, le=10)
    jobs: int = Field(1, ge=1)


class SweepResponse(BaseModel):
    sweep_id: str
    status: SweepStatus
    created_at: datetime
    max_period: int
    error_message: Optional[str] = None


# --- Maps ---


class FamilyValidation(BaseModel):
    family: str
    parameter: float
    odd: bool
    decreasing: bool
    limits: bool
    max_oddness_error: float

    @property
    def valid(self) -> bool:
        return self.odd and self.decreasing and self.limits


class LapReport(BaseModel):
    family: str
    parameter: float
    kneading: str
    periodic: bool
    counts: list[int]
    predicted: Optional[list[int]] = None
    point_laps: int = 0


class ScanRow(BaseModel):
    param: float
    word: str
    period: Optional[int] = None
    rho_kneading: Optional[float] = None
    rho_laps: Optional[float] = None
    status: ScanStatus
    error: Optional[str] = None
