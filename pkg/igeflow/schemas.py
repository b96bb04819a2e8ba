import json
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from igeflow.core.config import settings
from igeflow.core.errors import ConfigValidationError, UnknownModelError

Regime = Literal["exponential-volume-growth", "sub-exponential"]
StageStatus = Literal["ok", "failed", "skipped"]


class ErrorResponse(BaseModel):
    """Standard error response format."""

    error: str = Field(..., description="Error code")
    message: str = Field(..., description="Error message")
    timestamp: str = Field(..., description="Error timestamp")
    details: Optional[Dict[str, Any]] = Field(
        None, description="Additional error details"
    )


class IgeSummary(BaseModel):
    """Asymptotic growth of the information geometric entropy."""

    kig: float = Field(..., description="Fitted slope of ige against tau")
    kig_stderr: float = Field(..., description="Standard error of the slope")
    fit_window: Tuple[float, float] = Field(
        ..., description="First and last tau of the tail window used by the fit"
    )
    regime: Regime = Field(..., description="Volume growth regime")
    step_avg_increment: float = Field(
        ..., description="Mean relative volume increment per grid step"
    )
    normalized: bool = Field(
        False, description="Whether avg_vol is expressed in reference-volume units"
    )
    r_squared: float = Field(..., description="Coefficient of determination of the fit")
    kig_drift: float = Field(
        ..., description="Slope difference between the late and early halves of the window"
    )
    n_fit: int = Field(..., description="Number of grid points in the fit window")


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    ode_rel_tol: float = Field(
        default_factory=lambda: settings.ODE_REL_TOL,
        gt=0,
        description="Relative tolerance of the geodesic integrator",
    )
    quad_rel_tol: float = Field(
        default_factory=lambda: settings.QUAD_REL_TOL,
        gt=0,
        description="Relative tolerance of the volume quadrature",
    )


class FitOptions(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    window_fraction: float = Field(
        default_factory=lambda: settings.WINDOW_FRACTION,
        gt=0,
        le=1,
        description="Tail fraction of the series used by the K_IG fit",
    )
    kig_threshold: float = Field(
        default_factory=lambda: settings.KIG_THRESHOLD,
        description="Slope above which growth may be called exponential",
    )
    r2_threshold: float = Field(
        default_factory=lambda: settings.R2_THRESHOLD,
        ge=0,
        le=1,
        description="Minimum coefficient of determination for exponential growth",
    )
    drift_tol: float = Field(
        default_factory=lambda: settings.KIG_DRIFT_TOL,
        ge=0,
        description="Allowed slope drift across the window, relative to kig",
    )


class ModelSpec(BaseModel):
    """Catalog model reference; ``k`` expands gaussian_product to gaussian_product_<k>."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    name: str = Field(..., description="Catalog model name")
    k: Optional[int] = Field(
        None, ge=1, description="Number of factors for gaussian_product"
    )

    @property
    def catalog_name(self) -> str:
        if self.k is not None and not self.name.startswith("gaussian_product_"):
            return f"{self.name}_{self.k}"
        return self.name


class ExperimentConfig(BaseModel):
    """One IGE experiment: a catalog model, an initial condition and the pipeline knobs."""

    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)

    model: ModelSpec = Field(..., description="Statistical model to run on")
    theta0: List[float] = Field(..., description="Initial point of the geodesic")
    theta_dot0: List[float] = Field(..., description="Initial velocity of the geodesic")
    tau_max: float = Field(..., gt=0, description="Length of the geodesic")
    grid_points: int = Field(
        default_factory=lambda: settings.GRID_POINTS,
        ge=10,
        description="Uniform grid points over (0, tau_max]",
    )
    tolerances: Tolerances = Field(default_factory=Tolerances)
    fit: FitOptions = Field(default_factory=FitOptions)
    tau_burn: float = Field(0.0, ge=0, description="Averaging origin")
    bounds_mode: Literal["endpoint", "envelope"] = Field(
        "endpoint", description="How the geodesic box is spanned"
    )
    normalization: Optional[float] = Field(
        None, gt=0, description="Reference volume for a dimensionless IGE"
    )
    normalize_speed: bool = Field(
        True, description="Rescale theta_dot0 to unit Fisher speed"
    )
    output: str = Field(..., min_length=1, description="Output file stem")

    def grid(self) -> List[float]:
        return [(i + 1) / self.grid_points * self.tau_max for i in range(self.grid_points)]


class StageReport(BaseModel):
    name: str = Field(..., description="Pipeline stage")
    status: StageStatus = Field(..., description="Outcome of the stage")
    wall_time: float = Field(0.0, description="Wall time in seconds")
    error: Optional[ErrorResponse] = Field(None, description="Failure diagnostics")


class RunReport(BaseModel):
    """Outcome of one experiment, written next to its series."""

    config: ExperimentConfig = Field(..., description="Config echo")
    config_hash: str = Field(..., description="sha256 of the canonical config JSON")
    summary: Optional[IgeSummary] = Field(None, description="Fit summary when the run completed")
    stages: List[StageReport] = Field(default_factory=list)
    exit_code: int = Field(0, description="Process exit code for this run")
    path_status: Optional[str] = Field(
        None, description="Geodesic status: complete or domain_exit"
    )
    artifacts: List[str] = Field(default_factory=list, description="Files written")

    @property
    def failed_stage(self) -> Optional[StageReport]:
        return next((stage for stage in self.stages if stage.status == "failed"), None)


def _location(loc: Tuple[Any, ...]) -> str:
    return ".".join(str(part) for part in loc) or "config"


def parse_config(data: Dict[str, Any], source: Optional[str] = None) -> ExperimentConfig:
    """
    Validate a raw config and check vector lengths against the model.

    All problems are collected into one ConfigValidationError with items
    such as ``theta0: expected 2, got 3``.
    """
    from igeflow.models import catalog

    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        errors = [f"{_location(e['loc'])}: {e['msg']}" for e in exc.errors()]
        raise ConfigValidationError(errors, source) from exc

    errors = []
    try:
        dim = catalog(config.model.catalog_name).dim
    except UnknownModelError as exc:
        raise ConfigValidationError([f"model.name: {exc.message}"], source) from exc
    for field in ("theta0", "theta_dot0"):
        got = len(getattr(config, field))
        if got != dim:
            errors.append(f"{field}: expected {dim}, got {got}")
    if config.tau_burn >= config.tau_max:
        errors.append(f"tau_burn: must be below tau_max={config.tau_max}")
    if errors:
        raise ConfigValidationError(errors, source)
    return config


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigValidationError([f"json: {exc.msg} at line {exc.lineno}"], path) from exc
    except OSError as exc:
        raise ConfigValidationError([f"file: {exc.strerror}"], path) from exc
    if not isinstance(data, dict):
        raise ConfigValidationError(["config: expected a JSON object"], path)
    return parse_config(data, path)


def canonical_json(config: ExperimentConfig) -> str:
    return json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
