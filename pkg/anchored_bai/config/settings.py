from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    """Toolkit settings loaded from BAI_* environment variables (.env file)"""

    model_config = SettingsConfigDict(
        env_prefix="BAI_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",  # Ignore unrelated entries in .env
    )

    # Parallelism - BAI_THREADS; None means one worker per core
    threads: Optional[int] = Field(default=None, ge=1)

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None

    # Outputs
    output_dir: str = "results"

    # Sampler defaults (recorded in every output header)
    default_alpha: float = Field(default=0.5, gt=0.0, lt=1.0)
    default_cap: int = Field(default=10_000_000, ge=2)

    # Oracle
    solver_tol: float = Field(default=1e-10, gt=0.0)
    root_method: str = "bisect"  # or "brentq"
    brute_force_budget: int = 25_000_000  # simplex lattice points

    # Fluid integrator
    event_tol: float = Field(default=1e-9, gt=0.0)
    fluid_step_fraction: float = Field(default=1e-3, gt=0.0, le=0.1)

    @property
    def worker_count(self) -> int:
        """Resolved worker count (joblib convention: -1 = all cores)"""
        return self.threads if self.threads is not None else -1


@lru_cache()
def get_settings() -> Settings:
    """Cached settings instance - loads once from environment / .env"""
    return Settings()
