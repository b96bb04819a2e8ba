"""Relative entropy and the Fisher-Rao metric of a statistical model."""

import math
from typing import Literal, Optional

import numpy as np

from igeflow.core.config import settings
from igeflow.core.errors import (
    IndefiniteMetricError,
    QuadratureError,
    SingularMatrixError,
)
from igeflow.models.base import ParameterDomain, StatisticalModel
from igeflow.models.expectation import expectation
from igeflow.numerics.linalg import det_and_inverse

EntropyMethod = Literal["auto", "closed_form", "quadrature"]


def fd_steps(
    theta: np.ndarray, h: float, domain: Optional[ParameterDomain] = None
) -> np.ndarray:
    """
    Per-axis finite-difference steps h * max(1, |theta_k|).

    With a domain the unit shrinks to the distance from theta_k to the
    nearest finite bound, so steps stay proportional near an edge.
    """
    theta = np.asarray(theta, dtype=float)
    unit = np.maximum(1.0, np.abs(theta))
    if domain is not None:
        lo = np.array([a.lo for a in domain.axes])
        hi = np.array([a.hi for a in domain.axes])
        unit = np.minimum(unit, np.minimum(theta - lo, hi - theta))
    return h * unit


def relative_entropy(
    model: StatisticalModel,
    theta_prime: np.ndarray,
    theta: np.ndarray,
    method: EntropyMethod = "auto",
) -> float:
    """
    S(theta', theta) = -E_{theta'}[log p(X|theta') - log p(X|theta)].

    This is the negative Kullback-Leibler divergence: never positive and
    exactly zero when the two points coincide.
    """
    theta_prime = model.domain.require_interior(theta_prime, what="theta_prime")
    theta = model.domain.require_interior(theta, what="theta")
    if np.array_equal(theta_prime, theta):
        return 0.0

    if method == "closed_form" and model.closed_form_entropy is None:
        raise ValueError(f"model {model.name} has no closed-form relative entropy")
    if model.closed_form_entropy is not None and method != "quadrature":
        value = float(model.closed_form_entropy(theta_prime, theta))
    else:
        try:
            kl = expectation(
                model,
                theta_prime,
                lambda x: model.log_density(x, theta_prime) - model.log_density(x, theta),
            )
        except QuadratureError as exc:
            raise QuadratureError(
                f"relative entropy between {theta_prime.tolist()} and "
                f"{theta.tolist()} failed: {exc.message}",
                **exc.details,
            ) from exc
        value = -kl
    if not math.isfinite(value):
        raise QuadratureError(
            f"relative entropy is not finite between {theta_prime.tolist()} and {theta.tolist()}"
        )
    # rounding must not turn a divergence into a gain
    return min(value, 0.0)


def _require_spd(metric: np.ndarray, model: StatisticalModel, theta: np.ndarray, hint: str):
    try:
        det_and_inverse(metric)
    except SingularMatrixError as exc:
        raise IndefiniteMetricError(
            f"{model.name} metric at {theta.tolist()} is not positive definite "
            f"(pivot {exc.pivot}){hint}",
            pivot=exc.pivot,
        ) from exc


def fisher_metric(model: StatisticalModel, theta: np.ndarray) -> np.ndarray:
    """g_{mu nu}(theta): the closed form when registered, else numeric."""
    theta = model.domain.require_interior(theta)
    if model.closed_form_metric is None:
        return fisher_metric_numeric(model, theta)
    metric = np.asarray(model.closed_form_metric(theta), dtype=float)
    return 0.5 * (metric + metric.T)


def metric_field(model: StatisticalModel, thetas: np.ndarray) -> np.ndarray:
    """Metric at a stack of points, shape (m, n) -> (m, n, n)."""
    thetas = np.asarray(thetas, dtype=float)
    if model.vectorized and model.closed_form_metric is not None:
        metric = np.asarray(model.closed_form_metric(thetas), dtype=float)
        return 0.5 * (metric + np.swapaxes(metric, -1, -2))
    return np.stack([fisher_metric(model, t) for t in thetas])


def fisher_metric_numeric(
    model: StatisticalModel,
    theta: np.ndarray,
    h: Optional[float] = None,
    method: EntropyMethod = "auto",
) -> np.ndarray:
    """
    Negative Hessian of S(theta', theta) in theta' at theta' = theta.

    Central differences with steps h * max(1, |theta_k|); the diagonal uses
    S(theta, theta) = 0.
    """
    h = settings.METRIC_FD_STEP if h is None else h
    if h <= 0:
        raise ValueError("h must be positive")
    theta = model.domain.require_interior(theta)
    steps = fd_steps(theta, h, model.domain)
    model.domain.require_margin(theta, steps, 2.0)
    n = model.dim

    def entropy_at(offset: np.ndarray) -> float:
        return relative_entropy(model, theta + offset, theta, method)

    hessian = np.zeros((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = steps[i]
        hessian[i, i] = (entropy_at(ei) + entropy_at(-ei)) / steps[i] ** 2
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = steps[j]
            value = (
                entropy_at(ei + ej)
                - entropy_at(ei - ej)
                - entropy_at(-ei + ej)
                + entropy_at(-ei - ej)
            ) / (4.0 * steps[i] * steps[j])
            hessian[i, j] = hessian[j, i] = value

    metric = -hessian
    metric = 0.5 * (metric + metric.T)
    _require_spd(metric, model, theta, "; the step h is likely too large or too small")
    return metric


def fisher_metric_quadrature(
    model: StatisticalModel, theta: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """
    E_theta[d_mu log p * d_nu log p] by direct quadrature over microstates.

    Scores come from central differences of the log-density.
    """
    theta = model.domain.require_interior(theta)
    steps = fd_steps(theta, h, model.domain)
    model.domain.require_margin(theta, steps, 1.0)
    n = model.dim

    def score(x: np.ndarray, k: int) -> np.ndarray:
        e = np.zeros(n)
        e[k] = steps[k]
        return (model.log_density(x, theta + e) - model.log_density(x, theta - e)) / (
            2.0 * steps[k]
        )

    metric = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            metric[i, j] = metric[j, i] = expectation(
                model, theta, lambda x, i=i, j=j: score(x, i) * score(x, j)
            )
    _require_spd(metric, model, theta, "")
    return metric
