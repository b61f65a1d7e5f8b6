import os
from functools import lru_cache

from pydantic import BaseModel, Field


class Settings(BaseModel):
    """Process-wide defaults. Every field can be overridden from the environment."""

    log_level: str = Field(
        default_factory=lambda: os.getenv("MBVERIFY_LOG_LEVEL", "INFO"),
        description="Root log level",
    )
    cache_dir: str = Field(
        default_factory=lambda: os.getenv("MBVERIFY_CACHE_DIR", ".mbverify_cache"),
        description="Directory of cached run reports",
    )
    default_margin: float = Field(
        default_factory=lambda: float(os.getenv("MBVERIFY_MARGIN", "0.05")),
        description="Contour separation margin",
        gt=0,
    )
    default_rel_tol: float = Field(
        default_factory=lambda: float(os.getenv("MBVERIFY_REL_TOL", "1e-8")),
        description="Relative tolerance used when none is given",
        gt=0,
    )
    default_qmc_points: int = Field(
        default_factory=lambda: int(os.getenv("MBVERIFY_QMC_POINTS", "32768")),
        description="Points per QMC randomization",
        gt=0,
    )
    max_nodes: int = Field(
        default_factory=lambda: int(os.getenv("MBVERIFY_MAX_NODES", "4000000")),
        description="Node cap for tensor quadrature",
        gt=0,
    )
    jobs: int = Field(
        default_factory=lambda: int(os.getenv("MBVERIFY_JOBS", "1")),
        description="Worker count for node evaluation and sweeps",
        ge=1,
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
