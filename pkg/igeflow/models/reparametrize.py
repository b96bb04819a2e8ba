"""Change of coordinates on a model's parameter space.

``forward`` maps old coordinates theta to new ones theta', ``inverse``
maps back and ``jacobian(theta')`` returns J = d theta / d theta'. The new
metric follows the tensor law g'(theta') = J^T g(theta) J.
"""

import math
from dataclasses import replace
from typing import Callable, Optional, Sequence

import numpy as np

from igeflow.core.errors import ReparametrizationError
from igeflow.models.base import ParameterDomain, StatisticalModel
from igeflow.models.metric import fisher_metric
from igeflow.numerics.intervals import Interval

PointMap = Callable[[np.ndarray], np.ndarray]

_ROUND_TRIP_TOL = 1e-9
_CHECK_POINTS = 16


def _mapped_domain(domain: ParameterDomain, forward: PointMap) -> ParameterDomain:
    """Image of an axis-separable map, from the images of the corners."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lo = np.asarray(forward(np.array([a.lo for a in domain.axes])), dtype=float)
        hi = np.asarray(forward(np.array([a.hi for a in domain.axes])), dtype=float)
    axes = []
    for k in range(domain.dim):
        a, b = sorted((float(lo[k]), float(hi[k])))
        if math.isnan(a) or math.isnan(b):
            raise ReparametrizationError(
                f"cannot map the bounds of axis {k}; pass the new domain explicitly"
            )
        axes.append(Interval(a, b))
    return ParameterDomain(tuple(axes))


def reparametrize(
    model: StatisticalModel,
    forward: PointMap,
    inverse: PointMap,
    jacobian: PointMap,
    domain: Optional[ParameterDomain] = None,
    name: Optional[str] = None,
    seed: int = 0,
) -> StatisticalModel:
    """
    The same family in new coordinates.

    The maps are checked at random interior points: inverse(forward(theta))
    must return theta and det J must be positive.
    """
    rng = np.random.default_rng(seed)
    for theta in model.domain.sample(rng, _CHECK_POINTS):
        new = np.asarray(forward(theta), dtype=float)
        back = np.asarray(inverse(new), dtype=float)
        if not np.allclose(back, theta, rtol=_ROUND_TRIP_TOL, atol=_ROUND_TRIP_TOL):
            raise ReparametrizationError(
                f"inverse(forward(theta)) != theta at {theta.tolist()} (got {back.tolist()})",
                point=theta.tolist(),
            )
        det = float(np.linalg.det(np.asarray(jacobian(new), dtype=float)))
        if not det > 0.0:
            raise ReparametrizationError(
                f"jacobian determinant {det:.3g} is not positive at {new.tolist()}",
                point=new.tolist(),
            )

    new_domain = domain or _mapped_domain(model.domain, forward)

    def log_density(x: np.ndarray, theta_new: np.ndarray) -> np.ndarray:
        return model.log_density(x, inverse(theta_new))

    def metric(theta_new: np.ndarray) -> np.ndarray:
        theta_new = np.asarray(theta_new, dtype=float)
        jac = np.asarray(jacobian(theta_new), dtype=float)
        return jac.T @ fisher_metric(model, inverse(theta_new)) @ jac

    entropy = None
    if model.closed_form_entropy is not None:
        old_entropy = model.closed_form_entropy

        def entropy(theta_prime: np.ndarray, theta_new: np.ndarray) -> float:
            return old_entropy(inverse(theta_prime), inverse(theta_new))

    location_scale = None
    if model.location_scale is not None:
        old_location_scale = model.location_scale

        def location_scale(theta_new: np.ndarray):
            return old_location_scale(inverse(theta_new))

    return replace(
        model,
        name=name or f"{model.name}_reparametrized",
        domain=new_domain,
        log_density=log_density,
        closed_form_metric=metric,
        metric_derivative=None,
        closed_form_entropy=entropy,
        location_scale=location_scale,
        components=(),
        vectorized=False,
        description=f"{model.description} (reparametrized)",
    )


def log_scale_chart(model: StatisticalModel, axes: Sequence[int]) -> StatisticalModel:
    """Replace each listed positive axis theta_k by log(theta_k)."""
    axes = list(axes)
    for k in axes:
        if model.domain.axes[k].lo != 0.0 or not math.isinf(model.domain.axes[k].hi):
            raise ReparametrizationError(
                f"axis {k} of {model.name} is {model.domain.axes[k]}, not (0,inf)"
            )

    def forward(theta: np.ndarray) -> np.ndarray:
        out = np.array(theta, dtype=float)
        out[axes] = np.log(out[axes])
        return out

    def inverse(theta_new: np.ndarray) -> np.ndarray:
        out = np.array(theta_new, dtype=float)
        out[axes] = np.exp(out[axes])
        return out

    def jacobian(theta_new: np.ndarray) -> np.ndarray:
        diag = np.ones(model.dim)
        diag[axes] = np.exp(np.asarray(theta_new, dtype=float)[axes])
        return np.diag(diag)

    suffix = "_".join(str(k) for k in axes)
    return reparametrize(
        model, forward, inverse, jacobian, name=f"{model.name}_log{suffix}"
    )
