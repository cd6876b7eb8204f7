# Irregularity Profiler - Configuration
# Centralized configuration management with Pydantic Settings

from functools import lru_cache
from typing import List, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

DEFAULT_LOOKAHEAD_CANDIDATES = [1, 2, 5, 10, 20, 50, 100, 200]


class Settings(BaseSettings):
    """Application settings with environment variable support"""

    model_config = SettingsConfigDict(
        env_prefix="IRREGULARITY_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "Irregularity Profiler"
    VERSION: str = "1.0.0"
    ENVIRONMENT: str = Field(default="development")

    # Logging
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FORMAT: str = Field(default="json")

    # Outlier detection
    FENCE_K: float = Field(default=1.5)
    QUANTILE_RULE: str = Field(default="interpolate")

    # Peak detection
    DELTA: Optional[float] = Field(default=None)
    DELTA_FRACTION: float = Field(default=0.05)
    LOOKAHEAD_CANDIDATES: str = Field(default=",".join(str(c) for c in DEFAULT_LOOKAHEAD_CANDIDATES))

    # Dataset bank
    MAX_WORKERS: int = Field(default=4)

    @field_validator("ENVIRONMENT")
    @classmethod
    def validate_environment(cls, v):
        """Validate environment values"""
        allowed_envs = ["development", "testing", "production"]
        if v not in allowed_envs:
            raise ValueError(f"Environment must be one of: {allowed_envs}")
        return v

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v):
        """Validate log level values"""
        allowed_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed_levels:
            raise ValueError(f"Log level must be one of: {allowed_levels}")
        return v.upper()

    @field_validator("LOG_FORMAT")
    @classmethod
    def validate_log_format(cls, v):
        if v not in ("json", "console"):
            raise ValueError("Log format must be one of: ['json', 'console']")
        return v

    @field_validator("FENCE_K", "DELTA_FRACTION")
    @classmethod
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("DELTA")
    @classmethod
    def validate_delta(cls, v):
        if v is not None and v <= 0:
            raise ValueError("DELTA must be positive when set")
        return v

    @field_validator("QUANTILE_RULE")
    @classmethod
    def validate_quantile_rule(cls, v):
        allowed_rules = ["interpolate", "tukey_hinge"]
        if v not in allowed_rules:
            raise ValueError(f"Quantile rule must be one of: {allowed_rules}")
        return v

    @field_validator("LOOKAHEAD_CANDIDATES", mode="before")
    @classmethod
    def parse_lookahead_candidates(cls, v):
        """Normalize lookahead candidates given as a comma string or a list"""
        if isinstance(v, (list, tuple)):
            v = ",".join(str(item) for item in v)
        try:
            candidates = [int(item.strip()) for item in str(v).split(",") if item.strip()]
        except ValueError as exc:
            raise ValueError("Lookahead candidates must be integers") from exc
        if not candidates or any(item < 1 for item in candidates):
            raise ValueError("Lookahead candidates must be a non-empty list of integers >= 1")
        return ",".join(str(item) for item in candidates)

    @field_validator("MAX_WORKERS")
    @classmethod
    def validate_max_workers(cls, v):
        if v < 1:
            raise ValueError("MAX_WORKERS must be >= 1")
        return v

    @property
    def is_development(self) -> bool:
        """Check if running in development mode"""
        return self.ENVIRONMENT == "development"

    @property
    def is_testing(self) -> bool:
        """Check if running in testing mode"""
        return self.ENVIRONMENT == "testing"

    @property
    def lookahead_candidates(self) -> List[int]:
        """Lookahead candidates as integers, ascending and de-duplicated"""
        return sorted({int(item) for item in self.LOOKAHEAD_CANDIDATES.split(",")})


@lru_cache
def get_settings() -> Settings:
    """Get settings instance (cleared by tests that patch the environment)"""
    return Settings()
