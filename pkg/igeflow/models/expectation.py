"""Expectations over a model's sample space.

Unbounded microstate axes are mapped onto finite ones with an artanh
substitution centred on the model's location/scale hint, so that one
quadrature kernel serves both bounded and unbounded sample spaces.
"""

import math
from typing import Callable, List, Tuple

import numpy as np

from igeflow.core.errors import QuadratureError
from igeflow.models.base import (
    ContinuousSampleSpace,
    FiniteSampleSpace,
    StatisticalModel,
)
from igeflow.numerics.intervals import HyperRectangle, Interval
from igeflow.numerics.quadrature import integrate_box

# x (m, d) -> values (m,)
MicroField = Callable[[np.ndarray], np.ndarray]

# spread of the artanh map in units of the model scale
_STRETCH = 4.0


def _axis_map(
    axis: Interval, loc: float, scale: float
) -> Tuple[Interval, Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]]:
    """Finite u-interval and u -> (x, dx/du) for one microstate axis."""
    width = _STRETCH * scale
    if axis.is_finite:
        return axis, lambda u: (u, np.ones_like(u))
    if math.isinf(axis.lo) and math.isinf(axis.hi):
        return Interval(-1.0, 1.0), lambda u: (
            loc + width * np.arctanh(u),
            width / (1.0 - u * u),
        )
    if math.isfinite(axis.lo):
        lo = axis.lo
        return Interval(0.0, 1.0), lambda u: (
            lo + width * np.arctanh(u),
            width / (1.0 - u * u),
        )
    hi = axis.hi
    return Interval(0.0, 1.0), lambda u: (
        hi - width * np.arctanh(u),
        width / (1.0 - u * u),
    )


def expectation(
    model: StatisticalModel,
    theta: np.ndarray,
    fn: MicroField,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-15,
) -> float:
    """E_theta[fn(X)] = integral of p(X | theta) fn(X) over the sample space."""
    theta = np.asarray(theta, dtype=float)
    space = model.sample_space

    if isinstance(space, FiniteSampleSpace):
        x = space.points()
        terms = np.exp(model.log_density(x, theta)) * fn(x)
        return math.fsum(terms.tolist())

    if not isinstance(space, ContinuousSampleSpace):
        raise TypeError(f"unsupported sample space {space!r}")

    if model.location_scale is not None:
        loc, scale = model.location_scale(theta)
        loc = np.broadcast_to(np.asarray(loc, dtype=float), (space.dim,))
        scale = np.broadcast_to(np.asarray(scale, dtype=float), (space.dim,))
    else:
        loc, scale = np.zeros(space.dim), np.ones(space.dim)

    boxes: List[Interval] = []
    maps = []
    for k, axis in enumerate(space.axes):
        u_axis, mapping = _axis_map(axis, float(loc[k]), float(scale[k]))
        boxes.append(u_axis)
        maps.append(mapping)

    def integrand(u: np.ndarray) -> np.ndarray:
        xs, jac = [], np.ones(u.shape[0])
        for k, mapping in enumerate(maps):
            xk, dk = mapping(u[:, k])
            xs.append(xk)
            jac = jac * dk
        x = np.stack(xs, axis=-1)
        density = np.exp(model.log_density(x, theta))
        values = fn(x)
        # underflowed tails contribute nothing, even where fn blows up
        return np.where(density > 0.0, density * values * jac, 0.0)

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        result = integrate_box(integrand, HyperRectangle(tuple(boxes)), rel_tol, abs_tol)
    if not result.converged:
        raise QuadratureError(
            f"expectation under {model.name} at theta={theta.tolist()} did not converge "
            f"(error estimate {result.error:.3g})",
            theta=theta.tolist(),
        )
    return result.value
