"""Geodesic flow on a statistical manifold and the boxes it sweeps out."""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, List, Literal, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import trapezoid
from scipy.interpolate import CubicHermiteSpline

from igeflow.core.config import settings
from igeflow.core.errors import (
    DegenerateAxisError,
    DomainError,
    IgeflowError,
    IntegrationAborted,
)
from igeflow.geometry import christoffel, line_element
from igeflow.models.base import StatisticalModel
from igeflow.numerics.intervals import HyperRectangle, Interval
from igeflow.numerics.ode import OdeState, integrate_ode

BoundsMode = Literal["endpoint", "envelope"]


@dataclass(frozen=True)
class GeodesicPath:
    """
    Samples (s_i, theta_i, theta_dot_i) of a geodesic, s strictly increasing
    from 0. ``status`` is "complete" or "domain_exit" for a truncated path.
    """

    s: np.ndarray
    theta: np.ndarray
    theta_dot: np.ndarray
    model_name: str
    speed: float
    status: str = "complete"
    message: str = ""
    # interior extrema of single coordinates: (s, axis, theta^axis)
    turn_s: np.ndarray = field(default_factory=lambda: np.empty(0))
    turn_axis: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    turn_value: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def end(self) -> float:
        return float(self.s[-1])

    @property
    def dim(self) -> int:
        return int(self.theta.shape[1])

    @property
    def samples(self) -> Iterable[Tuple[float, np.ndarray, np.ndarray]]:
        return zip(self.s.tolist(), self.theta, self.theta_dot)

    @cached_property
    def interpolant(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.s, self.theta, self.theta_dot, axis=0)

    def position(self, tau: float) -> np.ndarray:
        """theta(tau) by cubic Hermite interpolation of the samples."""
        index = int(np.searchsorted(self.s, tau))
        if index < len(self.s) and self.s[index] == tau:
            return self.theta[index].copy()
        return np.asarray(self.interpolant(tau), dtype=float)


@dataclass(frozen=True)
class GeodesicBounds:
    """Integration box spanned by a geodesic up to tau."""

    box: HyperRectangle
    tau: float


def integrate_geodesic(
    model: StatisticalModel,
    theta0: np.ndarray,
    theta_dot0: np.ndarray,
    tau_max: float,
    rel_tol: Optional[float] = None,
    abs_tol: Optional[float] = None,
    *,
    normalize: bool = True,
    checkpoints: Iterable[float] = (),
    max_step: float = math.inf,
    h: Optional[float] = None,
) -> GeodesicPath:
    """
    Solve theta'' + Gamma(theta)[theta', theta'] = 0 for s in [0, tau_max].

    With ``normalize`` the initial velocity is rescaled to unit speed so that
    s is arc length. Leaving the domain truncates the path and marks it
    ``domain_exit``.
    """
    rel_tol = settings.ODE_REL_TOL if rel_tol is None else rel_tol
    abs_tol = settings.ODE_ABS_TOL if abs_tol is None else abs_tol
    theta0 = model.domain.require_interior(theta0, what="theta0")
    velocity = np.asarray(theta_dot0, dtype=float)
    if velocity.shape != (model.dim,):
        raise DomainError(
            f"theta_dot0 has {velocity.size} components, {model.name} has dimension {model.dim}"
        )
    if not np.all(np.isfinite(velocity)) or not np.any(velocity):
        raise DomainError(f"theta_dot0 must be finite and nonzero, got {velocity.tolist()}")
    if not tau_max > 0:
        raise ValueError(f"tau_max must be positive, got {tau_max}")

    speed = line_element(model, theta0, velocity)
    if not (math.isfinite(speed) and speed > 0.0):
        raise DomainError(
            f"theta_dot0={velocity.tolist()} has Fisher speed {speed:.3g} at {theta0.tolist()}",
            point=theta0.tolist(),
        )
    if normalize:
        velocity = velocity / math.sqrt(speed)
        speed = line_element(model, theta0, velocity)
        if not (np.all(np.isfinite(velocity)) and math.isfinite(speed) and speed > 0.0):
            raise DomainError(
                f"theta_dot0={np.asarray(theta_dot0).tolist()} cannot be scaled to unit speed",
                point=theta0.tolist(),
            )

    n = model.dim

    def rhs(_: float, y: np.ndarray) -> np.ndarray:
        theta, v = y[:n], y[n:]
        if not model.domain.contains(theta):
            return np.full(2 * n, np.nan)
        try:
            gamma = christoffel(model, theta, h)
        except IgeflowError:
            return np.full(2 * n, np.nan)
        return np.concatenate([v, -np.einsum("klm,l,m->k", gamma, v, v)])

    status, message = "complete", ""
    try:
        states = integrate_ode(
            rhs,
            OdeState(0.0, np.concatenate([theta0, velocity])),
            tau_max,
            rel_tol,
            abs_tol,
            checkpoints=checkpoints,
            max_step=max_step,
        )
    except IntegrationAborted as exc:
        states = exc.states
        if len(states) < 2:
            raise DomainError(
                f"geodesic from {theta0.tolist()} left the domain immediately: {exc.message}",
                point=theta0.tolist(),
            ) from exc
        status, message = "domain_exit", exc.message
        logger.warning(
            f"geodesic on {model.name} truncated at s={states[-1].t:.6g}: {exc.message}"
        )

    ys = np.array([state.y for state in states])
    turn_s, turn_axis, turn_value = _turning_points(rhs, states, n, rel_tol, abs_tol)
    return GeodesicPath(
        s=np.array([state.t for state in states]),
        theta=ys[:, :n],
        theta_dot=ys[:, n:],
        model_name=model.name,
        speed=speed,
        status=status,
        message=message,
        turn_s=turn_s,
        turn_axis=turn_axis,
        turn_value=turn_value,
    )


def _refine_turning_point(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    left: OdeState,
    right: float,
    guess: float,
    index: int,
    rel_tol: float,
    abs_tol: float,
    iterations: int = 4,
) -> Tuple[float, np.ndarray]:
    """Newton on theta_dot^k = 0, each iterate reached by integrating from ``left``."""
    t, y = left.t, left.y
    for _ in range(iterations):
        guess = min(max(guess, left.t), right)
        try:
            y_new = (
                integrate_ode(rhs, left, guess, rel_tol, abs_tol)[-1].y
                if guess > left.t
                else left.y
            )
        except IntegrationAborted:
            break
        t, y = guess, y_new
        accel = float(rhs(t, y)[index])
        if not math.isfinite(accel) or accel == 0.0:
            break
        step = float(y[index]) / accel
        guess = t - step
        if abs(step) <= 1e-14 * max(1.0, abs(t)):
            break
    return t, y


def _turning_points(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    states: List[OdeState],
    n: int,
    rel_tol: float,
    abs_tol: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Extrema of each coordinate between accepted samples.

    Zeros of theta_dot^k are bracketed on the Hermite interpolant and then
    polished against the ODE, so an extremum between two samples is known
    to integration accuracy rather than interpolation accuracy.
    """
    s = np.array([state.t for state in states])
    ys = np.array([state.y for state in states])
    found_s: List[float] = []
    found_axis: List[int] = []
    found_value: List[float] = []
    if len(s) >= 2:
        for k in range(n):
            rates = ys[:, n + k]
            if not np.any(rates):
                continue
            spline = CubicHermiteSpline(s, ys[:, k], rates)
            for root in spline.derivative().roots(extrapolate=False):
                if not math.isfinite(root):
                    continue
                i = int(np.clip(np.searchsorted(s, root, side="right") - 1, 0, len(s) - 2))
                t, y = _refine_turning_point(
                    rhs, states[i], float(s[i + 1]), float(root), n + k, rel_tol, abs_tol
                )
                found_s.append(t)
                found_axis.append(k)
                found_value.append(float(y[k]))
    return (
        np.asarray(found_s, dtype=float),
        np.asarray(found_axis, dtype=int),
        np.asarray(found_value, dtype=float),
    )


def bounds_at(
    path: GeodesicPath,
    tau: float,
    mode: BoundsMode = "endpoint",
    floor: Optional[float] = None,
) -> GeodesicBounds:
    """
    Box with axis k spanning theta^k(0) and theta^k(tau).

    ``endpoint`` orders the two endpoint values per axis; ``envelope`` uses
    the running min/max of the path over [0, tau], turning points between
    samples included.
    """
    floor = settings.DEGENERACY_FLOOR if floor is None else floor
    if not 0.0 < tau <= path.end * (1.0 + 1e-12):
        raise DomainError(
            f"tau={tau} is outside the path extent (0, {path.end}]", tau=tau
        )
    tau = min(tau, path.end)
    start = path.theta[0]
    end = path.position(tau)
    if mode == "endpoint":
        lo, hi = np.minimum(start, end), np.maximum(start, end)
    elif mode == "envelope":
        inside = path.theta[path.s <= tau]
        visited = np.vstack([inside, end[None, :]])
        lo, hi = visited.min(axis=0), visited.max(axis=0)
        reached = path.turn_s <= tau
        np.minimum.at(lo, path.turn_axis[reached], path.turn_value[reached])
        np.maximum.at(hi, path.turn_axis[reached], path.turn_value[reached])
    else:
        raise ValueError(f"unknown bounds mode '{mode}'")

    axes = []
    for k in range(path.dim):
        width = float(hi[k] - lo[k])
        if width < floor * max(1.0, abs(float(lo[k])), abs(float(hi[k]))):
            raise DegenerateAxisError(
                f"axis {k} of the geodesic box is degenerate at tau={tau:.12g} "
                f"(width {width:.3g}); theta^{k} does not move",
                axis=k,
                tau=tau,
            )
        axes.append(Interval(float(lo[k]), float(hi[k])))
    return GeodesicBounds(HyperRectangle(tuple(axes)), tau)


def speed_drift(path: GeodesicPath, model: StatisticalModel) -> float:
    """max_i |g(theta_i)[v_i, v_i] - speed| / speed along the samples."""
    speeds = np.array(
        [line_element(model, theta, v) for _, theta, v in path.samples]
    )
    return float(np.max(np.abs(speeds - path.speed)) / path.speed)


def arc_length(path: GeodesicPath, model: StatisticalModel) -> float:
    """Length of the sampled path, integral of sqrt(g[v, v]) ds."""
    rates = np.sqrt(
        [line_element(model, theta, v) for _, theta, v in path.samples]
    )
    return float(trapezoid(rates, path.s))
