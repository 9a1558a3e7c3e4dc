# sla_lab/config.py
from functools import lru_cache
from pathlib import Path

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class _Settings(BaseSettings):
    """
    Runtime configuration.

    Every field can be supplied as an environment variable (``SLA_`` prefix) or
    in a .env file at the project root. Experiment parameters do not live here;
    they belong to the per-run config file (see services/training/schemas.py).
    """

    # ------------------------------------------------------------------ #
    # Locations                                                          #
    # ------------------------------------------------------------------ #
    data_dir: Path = Field(Path("./data"), description="Directory holding the MNIST IDX files")
    runs_dir: Path = Field(Path("./runs"), description="Default parent of run output directories")

    # ------------------------------------------------------------------ #
    # Execution                                                          #
    # ------------------------------------------------------------------ #
    workers: int = Field(1, ge=1, description="Threads used to train ensemble members in parallel")
    metrics_wall_time: bool = Field(
        False,
        description="Write wall-clock seconds into metrics CSVs (breaks byte-identical reruns)",
    )

    # ------------------------------------------------------------------ #
    # Misc                                                               #
    # ------------------------------------------------------------------ #
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="SLA_",
        env_file=(".env", "sla_lab/.env"),
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, v: str) -> str:
        return v.upper()


@lru_cache
def settings() -> _Settings:
    """Singleton accessor; import this everywhere."""
    return _Settings()
