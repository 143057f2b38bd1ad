import json
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    max_period: int = Field(10, alias="MAX_PERIOD")
    sweep_period: int = Field(8, alias="SWEEP_PERIOD")
    sweep_jobs: int = Field(1, alias="SWEEP_JOBS")

    # Exact-arithmetic root isolation and identity checks
    root_tolerance: float = Field(1e-12, alias="ROOT_TOLERANCE")
    spectral_tolerance: float = Field(1e-8, alias="SPECTRAL_TOLERANCE")

    # Numeric orbits
    discontinuity_eps: float = Field(1e-9, alias="DISCONTINUITY_EPS")
    escape_eps: float = Field(1e-7, alias="ESCAPE_EPS")
    cycle_quantum: float = Field(1e-10, alias="CYCLE_QUANTUM")
    kneading_horizon: int = Field(200, alias="KNEADING_HORIZON")

    # Lap counting
    lap_depth: int = Field(8, alias="LAP_DEPTH")
    default_lap_terms: int = Field(6, alias="DEFAULT_LAP_TERMS")

    log_level: str = Field("INFO", alias="LOG_LEVEL")

    model_config = {"env_file": ".env", "extra": "ignore"}


def load_families(path: str | None = None) -> dict:
    if path is None:
        path = str(Path(__file__).parent.parent / "config" / "families.json")
    with open(path) as f:
        return json.load(f)


settings = Settings()
