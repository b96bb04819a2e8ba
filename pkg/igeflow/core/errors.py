"""Error hierarchy shared by every igeflow layer.

Each error carries a stable machine code so the CLI can print one
greppable line per failure.
"""

from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence


class IgeflowError(Exception):
    """Base class for all igeflow failures."""

    code = "IGEFLOW_ERROR"

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_response(self) -> "ErrorResponse":
        from igeflow.schemas import ErrorResponse

        return ErrorResponse(
            error=self.code,
            message=self.message,
            timestamp=datetime.now(timezone.utc).isoformat(),
            details={k: _jsonable(v) for k, v in self.details.items()} or None,
        )

    def one_line(self) -> str:
        return f"{self.code}: {self.message}"


class IntegrationAborted(IgeflowError):
    """ODE integration stopped early; ``states`` holds the accepted steps."""

    code = "ODE_ABORTED"

    def __init__(self, message: str, states: Sequence[Any] = (), **details: Any):
        super().__init__(message, **details)
        self.states = list(states)


class StepSizeUnderflowError(IntegrationAborted):
    code = "ODE_STEP_UNDERFLOW"


class NonFiniteError(IntegrationAborted):
    code = "ODE_NON_FINITE"


class QuadratureError(IgeflowError):
    code = "QUADRATURE_FAILED"


class SingularMatrixError(IgeflowError):
    code = "SINGULAR_MATRIX"

    def __init__(self, message: str, pivot: int, **details: Any) -> None:
        super().__init__(message, pivot=pivot, **details)
        self.pivot = pivot


class DomainError(IgeflowError):
    code = "DOMAIN_VIOLATION"


class DegenerateAxisError(IgeflowError):
    code = "DEGENERATE_AXIS"

    def __init__(self, message: str, axis: int, tau: float, **details: Any) -> None:
        super().__init__(message, axis=axis, tau=tau, **details)
        self.axis = axis
        self.tau = tau


class UnknownModelError(IgeflowError):
    code = "UNKNOWN_MODEL"


class IndefiniteMetricError(IgeflowError):
    code = "INDEFINITE_METRIC"


class ReparametrizationError(IgeflowError):
    code = "BAD_REPARAMETRIZATION"


class SeriesError(IgeflowError):
    code = "BAD_SERIES"


class FitError(IgeflowError):
    code = "FIT_FAILED"


class StageError(IgeflowError):
    """A pipeline stage raised something outside the igeflow hierarchy."""

    code = "STAGE_FAILED"


class ConfigValidationError(IgeflowError):
    code = "CONFIG_INVALID"

    def __init__(self, errors: List[str], source: Optional[str] = None) -> None:
        where = f" in {source}" if source else ""
        super().__init__(
            f"{len(errors)} config error(s){where}: " + "; ".join(errors),
            errors=errors,
        )
        self.errors = errors


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)
