"""Configuration management for the K(m) benchmark toolkit."""

from pydantic_settings import BaseSettings
from functools import lru_cache
from typing import List


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables."""

    log_level: str = "INFO"

    # Decision / campaign defaults
    default_timeout_seconds: float = 10.0
    default_samples: int = 100
    default_percentiles: List[float] = [50.0, 90.0]
    campaign_workers: int = 1

    # Generator and oracle limits
    rejection_cap: int = 1_000_000
    oracle_guard: int = 1_000_000
    as_set_max_clauses: int = 6
    bounded_oracle_max_vars: int = 3
    bounded_oracle_max_depth: int = 2

    # HTTP surface
    app_host: str = "0.0.0.0"
    app_port: int = 8000
    debug: bool = False
    api_max_campaign_formulas: int = 2000

    class Config:
        env_prefix = "KMBENCH_"
        env_file = ".env"
        case_sensitive = False


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
