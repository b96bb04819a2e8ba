import time
from typing import Callable, List, TypeVar

from loguru import logger

from igeflow.core.errors import IgeflowError, StageError
from igeflow.schemas import StageReport

T = TypeVar("T")


def timing_middleware(
    experiment: str,
    stage: str,
    call_next: Callable[[], T],
    reports: List[StageReport],
) -> T:
    """
    Run one pipeline stage, log its wall time and append a StageReport.

    Failures are recorded with their error response and re-raised as an
    IgeflowError; anything else a stage raises becomes a StageError.
    The failure line is logged at DEBUG since the caller reports it.
    """
    start_time = time.perf_counter()
    try:
        result = call_next()
    except Exception as exc:
        process_time = time.perf_counter() - start_time
        error = exc
        if not isinstance(exc, IgeflowError):
            error = StageError(
                f"{stage} stage raised {type(exc).__name__}: {exc}",
                exception=type(exc).__name__,
            )
        reports.append(
            StageReport(
                name=stage,
                status="failed",
                wall_time=process_time,
                error=error.to_response(),
            )
        )
        logger.debug(f'"{experiment} {stage}" {error.code} {process_time:.2f}s')
        if error is exc:
            raise
        raise error from exc
    process_time = time.perf_counter() - start_time
    reports.append(StageReport(name=stage, status="ok", wall_time=process_time))
    logger.info(f'"{experiment} {stage}" ok {process_time:.2f}s')
    return result
