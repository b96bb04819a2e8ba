import os
from typing import Optional

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    """
    Settings for igeflow.

    Reads environment variables from a .env file. Numerical defaults here
    feed every operation above the numerics kernels that is called
    without an explicit tolerance.
    """

    PROJECT_NAME: str = "igeflow"
    LOG_LEVEL: str = "INFO"

    # Worker cap for volume evaluation and config batches
    IGEFLOW_THREADS: Optional[int] = None

    # Integration tolerances
    ODE_REL_TOL: float = 1e-8
    ODE_ABS_TOL: float = 1e-10
    QUAD_REL_TOL: float = 1e-6

    # Finite-difference steps (relative to max(1, |theta_k|))
    METRIC_FD_STEP: float = 1e-3
    GEOMETRY_FD_STEP: float = 1e-4

    # Domain-relative margins
    BOUNDARY_MARGIN: float = 1e-9
    DEGENERACY_FLOOR: float = 1e-12

    # IGE pipeline and fit
    GRID_POINTS: int = 200
    WINDOW_FRACTION: float = 0.5
    KIG_THRESHOLD: float = 1e-2
    R2_THRESHOLD: float = 0.99
    KIG_DRIFT_TOL: float = 0.1

    model_config = SettingsConfigDict(case_sensitive=True, env_file=".env")

    @property
    def workers(self) -> int:
        """Worker parallelism: IGEFLOW_THREADS or the available cores."""
        if self.IGEFLOW_THREADS is not None and self.IGEFLOW_THREADS > 0:
            return self.IGEFLOW_THREADS
        return os.cpu_count() or 1


settings = Settings()
