"""Adaptive Dormand-Prince 5(4) integrator with PI step-size control."""

import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional

import numpy as np
from loguru import logger

from igeflow.core.errors import (
    IntegrationAborted,
    NonFiniteError,
    StepSizeUnderflowError,
)

VectorField = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OdeState:
    """Accepted integrator state; ``dydt`` is the field value at (t, y)."""

    t: float
    y: np.ndarray
    dydt: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.y)):
            raise ValueError(f"non-finite state at t={self.t}: {self.y}")


# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B_LOW = np.array(
    [
        5179 / 57600,
        0.0,
        7571 / 16695,
        393 / 640,
        -92097 / 339200,
        187 / 2100,
        1 / 40,
    ]
)
_E = _B - _B_LOW

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
# PI controller exponents (Gustafsson), order 5 estimate
_ALPHA = 0.7 / 5
_BETA = 0.4 / 5


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _evaluate(rhs: VectorField, t: float, y: np.ndarray) -> np.ndarray:
    return np.asarray(rhs(t, y), dtype=float)


def _initial_step(
    rhs: VectorField,
    t0: float,
    y0: np.ndarray,
    f0: np.ndarray,
    span: float,
    rel_tol: float,
    abs_tol: float,
) -> float:
    scale = abs_tol + rel_tol * np.abs(y0)
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = _evaluate(rhs, t0 + h0, y0 + h0 * f0)
    if not np.all(np.isfinite(f1)):
        return h0 * 1e-3
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate_ode(
    rhs: VectorField,
    y0: OdeState,
    t_end: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    *,
    checkpoints: Iterable[float] = (),
    max_step: float = math.inf,
    first_step: Optional[float] = None,
    max_steps: int = 1_000_000,
) -> List[OdeState]:
    """
    Integrate ``y' = rhs(t, y)`` from ``y0.t`` to ``t_end``.

    Every accepted step is returned. Checkpoints inside the span and
    ``t_end`` itself are landed on exactly by clamping the step.

    Raises:
        StepSizeUnderflowError: the controller drove h below round-off.
        NonFiniteError: the field stays NaN/Inf however short the step.
        IntegrationAborted: ``max_steps`` exhausted.

    Each of these carries the accepted part of the trajectory in ``states``.
    """
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("rel_tol and abs_tol must be positive")
    t = float(y0.t)
    if t_end < t:
        raise ValueError(f"t_end={t_end} precedes the initial time {t}")

    y = np.array(y0.y, dtype=float)
    f = _evaluate(rhs, t, y)
    if not np.all(np.isfinite(f)):
        raise NonFiniteError(f"non-finite field at initial time t={t}", [], t=t)
    states = [OdeState(t, y, f)]
    if t_end == t:
        return states

    stops = sorted({float(c) for c in checkpoints if t < c < t_end})
    stops.append(float(t_end))
    stop_index = 0

    h = first_step or _initial_step(rhs, t, y, f, t_end - t, rel_tol, abs_tol)
    h = min(h, max_step)
    err_prev = 1e-4
    rejected = non_finite = False
    n_steps = 0

    while stop_index < len(stops):
        target = stops[stop_index]
        n_steps += 1
        if n_steps > max_steps:
            raise IntegrationAborted(
                f"step budget {max_steps} exhausted at t={t}", states, t=t
            )

        step = min(h, max_step)
        hit = t + step >= target - 1e-13 * max(1.0, abs(target))
        if hit:
            step = target - t
        if step <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
            if non_finite:
                raise NonFiniteError(
                    f"non-finite field value beyond t={t}", states, t=t, h=step
                )
            raise StepSizeUnderflowError(
                f"step size underflow at t={t} (h={step:.3e})", states, t=t, h=step
            )

        k = [f]
        for i in range(1, 7):
            yi = y + step * np.dot(_A[i], k)
            k.append(_evaluate(rhs, t + _C[i] * step, yi))
        y_new = y + step * np.dot(_B, k)
        f_new = k[6]
        err_vec = step * np.dot(_E, k)

        if not (
            np.all(np.isfinite(y_new))
            and np.all(np.isfinite(f_new))
            and np.all(np.isfinite(err_vec))
        ):
            # shrink until the trial stages stay where the field is defined
            logger.debug(f"ode step rejected at t={t:.6g}: non-finite field, h={step:.3g}")
            h = step * _MIN_FACTOR
            rejected = non_finite = True
            continue
        non_finite = False

        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(err_vec / scale)

        if err <= 1.0:
            t = target if hit else t + step
            y, f = y_new, f_new
            states.append(OdeState(t, y, f))
            if hit:
                stop_index += 1
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err ** (-_ALPHA) * err_prev**_BETA
                factor = min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            if rejected:
                factor = min(1.0, factor)
            # a clamped step says nothing about the controller's h
            if not hit or step >= h:
                h = step * factor
            err_prev = max(err, 1e-4)
            rejected = False
        else:
            factor = max(_MIN_FACTOR, _SAFETY * err ** (-1 / 5))
            logger.debug(f"ode step rejected at t={t:.6g}: err={err:.3g}, h={step:.3g}")
            h = step * factor
            rejected = True

    return states
