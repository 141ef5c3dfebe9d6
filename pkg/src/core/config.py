"""
Configuration settings for the llvkit toolkit.
"""
from typing import Literal

from pydantic import Field

try:
    from pydantic_settings import BaseSettings, SettingsConfigDict
except ImportError:  # pragma: no cover
    from pydantic import BaseSettings

    SettingsConfigDict = dict


class Settings(BaseSettings):
    """Toolkit settings."""

    # Logging Configuration
    log_level: str = "INFO"

    # Numerical Tolerances
    condition_cap: float = Field(1e12, description="Largest condition number still treated as invertible")
    singular_tol: float = Field(1e-10, description="Smallest singular value still treated as nonzero")
    psi_tol: float = Field(1e-10, description="psi entries at or below this value count as vanished")

    # Distance Configuration
    default_lambda: float = Field(1e-5, description="Weighting constant for the psi-difference terms of d_LLV")
    n_input_sets: int = Field(200, description="Candidate input sets drawn during pivot selection")

    # Run Configuration
    profile: Literal["ci", "full"] = "ci"
    num_threads: int = Field(1, ge=1, validation_alias="NUM_THREADS")

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=False, extra="ignore")


# Global settings instance
_settings = None


def get_settings() -> Settings:
    """Get toolkit settings."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings
