from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, NoDecode, SettingsConfigDict
from typing import Annotated, List, Literal
import json
import os


def _default_threads() -> int:
    return max(1, os.cpu_count() or 1)


class Settings(BaseSettings):
    # Application Settings
    log_level: str = "INFO"
    threads: int = Field(default_factory=_default_threads, ge=1)

    # Polytope enumeration
    delta: float = Field(default=0.001, gt=0)
    lp_backend: Literal["simplex", "highs"] = "simplex"
    ichm_max_rounds: int = Field(default=200, ge=1)

    # Benchmark / simulation
    dt: float = Field(default=0.005, gt=0)
    horizons: Annotated[List[float], NoDecode] = [0.05, 0.15, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0]
    seed: int = 0
    configs: int = Field(default=20, ge=1)
    env_rows: Annotated[List[int], NoDecode] = [0, 10, 100, 500, 1000]
    m1_eps: float | None = None
    cube_velocity_aware: bool = False
    timing_repeats: int = Field(default=1, ge=1)
    report_timings: bool = False

    # HTTP API
    api_title: str = "reachspan"
    api_version: str = "0.1.0"

    model_config = SettingsConfigDict(
        env_prefix="REACHSPAN_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore"
    )

    @field_validator("horizons", "env_rows", mode="before")
    @classmethod
    def _split_csv(cls, value):
        """Accept JSON lists or plain comma-separated strings"""
        if isinstance(value, str):
            try:
                return json.loads(value)
            except json.JSONDecodeError:
                return [item.strip() for item in value.split(",") if item.strip()]
        return value

    @field_validator("horizons")
    @classmethod
    def _positive_horizons(cls, value: List[float]) -> List[float]:
        if not value or any(t <= 0 for t in value):
            raise ValueError("horizons must be a non-empty list of positive values")
        return value

    @property
    def m1_tolerance(self) -> float:
        """Containment tolerance for m1 (defaults to delta)"""
        return self.delta if self.m1_eps is None else self.m1_eps


settings = Settings()
