"""Catalog of parametric families with closed-form Fisher-Rao geometry."""

import math
import re
from typing import Callable, Dict, List

import numpy as np

from igeflow.core.errors import UnknownModelError
from igeflow.models.base import (
    ContinuousSampleSpace,
    FiniteSampleSpace,
    ParameterDomain,
    StatisticalModel,
)
from igeflow.numerics.intervals import Interval

REAL_LINE = Interval(-math.inf, math.inf)
POSITIVE = Interval(0.0, math.inf)
UNIT = Interval(0.0, 1.0)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_PRODUCT = re.compile(r"^gaussian_product_(\d+)$")


def _diag(entries: List[np.ndarray]) -> np.ndarray:
    """Stack of diagonal matrices from per-axis arrays of equal shape."""
    values = np.stack(entries, axis=-1)
    n = values.shape[-1]
    out = np.zeros(values.shape + (n,))
    idx = np.arange(n)
    out[..., idx, idx] = values
    return out


# gaussian_1d ------------------------------------------------------------


def _gaussian_log_density(x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    mu, sigma = theta[0], theta[1]
    z = (x[:, 0] - mu) / sigma
    return -0.5 * z * z - math.log(sigma) - _LOG_SQRT_2PI


def _gaussian_metric(theta: np.ndarray) -> np.ndarray:
    sigma = np.asarray(theta, dtype=float)[..., 1]
    inv = 1.0 / (sigma * sigma)
    return _diag([inv, 2.0 * inv])


def _gaussian_metric_derivative(theta: np.ndarray) -> np.ndarray:
    sigma = float(theta[1])
    dg = np.zeros((2, 2, 2))
    dg[1, 0, 0] = -2.0 / sigma**3
    dg[1, 1, 1] = -4.0 / sigma**3
    return dg


def _gaussian_entropy(theta_prime: np.ndarray, theta: np.ndarray) -> float:
    mu_p, s_p = theta_prime
    mu, s = theta
    kl = math.log(s / s_p) + (s_p * s_p + (mu_p - mu) ** 2) / (2.0 * s * s) - 0.5
    return -kl


def gaussian_1d() -> StatisticalModel:
    return StatisticalModel(
        name="gaussian_1d",
        dim=2,
        domain=ParameterDomain((REAL_LINE, POSITIVE)),
        sample_space=ContinuousSampleSpace((REAL_LINE,)),
        log_density=_gaussian_log_density,
        closed_form_metric=_gaussian_metric,
        metric_derivative=_gaussian_metric_derivative,
        closed_form_entropy=_gaussian_entropy,
        location_scale=lambda theta: (theta[0], theta[1]),
        vectorized=True,
        description="normal N(mu, sigma^2), theta = (mu, sigma)",
    )


# gaussian_mean_only -----------------------------------------------------


def _mean_only_log_density(x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    z = x[:, 0] - theta[0]
    return -0.5 * z * z - _LOG_SQRT_2PI


def gaussian_mean_only() -> StatisticalModel:
    return StatisticalModel(
        name="gaussian_mean_only",
        dim=1,
        domain=ParameterDomain((REAL_LINE,)),
        sample_space=ContinuousSampleSpace((REAL_LINE,)),
        log_density=_mean_only_log_density,
        closed_form_metric=lambda theta: _diag(
            [np.ones(np.asarray(theta, dtype=float).shape[:-1])]
        ),
        metric_derivative=lambda theta: np.zeros((1, 1, 1)),
        closed_form_entropy=lambda tp, t: -0.5 * float(tp[0] - t[0]) ** 2,
        location_scale=lambda theta: (theta[0], 1.0),
        vectorized=True,
        description="unit-variance normal N(mu, 1), flat manifold",
    )


# exponential_rate -------------------------------------------------------


def _exponential_log_density(x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    rate = theta[0]
    return math.log(rate) - rate * x[:, 0]


def _exponential_entropy(theta_prime: np.ndarray, theta: np.ndarray) -> float:
    ratio = float(theta[0] / theta_prime[0])
    return -(ratio - math.log(ratio) - 1.0)


def exponential_rate() -> StatisticalModel:
    return StatisticalModel(
        name="exponential_rate",
        dim=1,
        domain=ParameterDomain((POSITIVE,)),
        sample_space=ContinuousSampleSpace((POSITIVE,)),
        log_density=_exponential_log_density,
        closed_form_metric=lambda theta: _diag(
            [1.0 / np.asarray(theta, dtype=float)[..., 0] ** 2]
        ),
        metric_derivative=lambda theta: np.full((1, 1, 1), -2.0 / float(theta[0]) ** 3),
        closed_form_entropy=_exponential_entropy,
        location_scale=lambda theta: (0.0, 1.0 / theta[0]),
        vectorized=True,
        description="exponential with rate lambda",
    )


# bernoulli ---------------------------------------------------------------


def _bernoulli_log_density(x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    p = theta[0]
    k = x[:, 0]
    return k * math.log(p) + (1.0 - k) * math.log1p(-p)


def _bernoulli_metric(theta: np.ndarray) -> np.ndarray:
    p = np.asarray(theta, dtype=float)[..., 0]
    return _diag([1.0 / (p * (1.0 - p))])


def _bernoulli_metric_derivative(theta: np.ndarray) -> np.ndarray:
    p = float(theta[0])
    return np.full((1, 1, 1), -(1.0 - 2.0 * p) / (p * (1.0 - p)) ** 2)


def _bernoulli_entropy(theta_prime: np.ndarray, theta: np.ndarray) -> float:
    q, p = float(theta_prime[0]), float(theta[0])
    kl = q * math.log(q / p) + (1.0 - q) * math.log((1.0 - q) / (1.0 - p))
    return -kl


def bernoulli() -> StatisticalModel:
    return StatisticalModel(
        name="bernoulli",
        dim=1,
        domain=ParameterDomain((UNIT,)),
        sample_space=FiniteSampleSpace((0.0, 1.0)),
        log_density=_bernoulli_log_density,
        closed_form_metric=_bernoulli_metric,
        metric_derivative=_bernoulli_metric_derivative,
        closed_form_entropy=_bernoulli_entropy,
        vectorized=True,
        description="Bernoulli with success probability p",
    )


# gaussian_product_k --------------------------------------------------------


def gaussian_product(k: int) -> StatisticalModel:
    """
    k independent normals, theta = (mu_1, sigma_1, ..., mu_k, sigma_k).

    The metric is block diagonal with one gaussian_1d block per component.
    """
    if k < 1:
        raise UnknownModelError(f"gaussian_product_k needs k >= 1, got {k}")
    block = gaussian_1d()

    def log_density(x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        total = np.zeros(x.shape[0])
        for i in range(k):
            total = total + _gaussian_log_density(x[:, i : i + 1], theta[2 * i : 2 * i + 2])
        return total

    def metric(theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        sigmas = theta[..., 1::2]
        inv = 1.0 / (sigmas * sigmas)
        entries = []
        for i in range(k):
            entries.extend([inv[..., i], 2.0 * inv[..., i]])
        return _diag(entries)

    def metric_derivative(theta: np.ndarray) -> np.ndarray:
        dg = np.zeros((2 * k, 2 * k, 2 * k))
        for i in range(k):
            s = slice(2 * i, 2 * i + 2)
            dg[s, s, s] = _gaussian_metric_derivative(theta[s])
        return dg

    def entropy(theta_prime: np.ndarray, theta: np.ndarray) -> float:
        return math.fsum(
            _gaussian_entropy(theta_prime[2 * i : 2 * i + 2], theta[2 * i : 2 * i + 2])
            for i in range(k)
        )

    return StatisticalModel(
        name=f"gaussian_product_{k}",
        dim=2 * k,
        domain=ParameterDomain((REAL_LINE, POSITIVE) * k),
        sample_space=ContinuousSampleSpace((REAL_LINE,) * k),
        log_density=log_density,
        closed_form_metric=metric,
        metric_derivative=metric_derivative,
        closed_form_entropy=entropy,
        location_scale=lambda theta: (theta[0::2], theta[1::2]),
        components=(block,) * k,
        vectorized=True,
        description=f"{k} independent normals, theta = (mu_i, sigma_i)",
    )


_REGISTRY: Dict[str, Callable[[], StatisticalModel]] = {
    "gaussian_1d": gaussian_1d,
    "gaussian_mean_only": gaussian_mean_only,
    "exponential_rate": exponential_rate,
    "bernoulli": bernoulli,
}


def available_models() -> List[str]:
    return sorted(_REGISTRY) + ["gaussian_product_<k>"]


def catalog(name: str) -> StatisticalModel:
    """Look up a catalog model by name."""
    factory = _REGISTRY.get(name)
    if factory is not None:
        return factory()
    match = _PRODUCT.match(name)
    if match and int(match.group(1)) >= 1:
        return gaussian_product(int(match.group(1)))
    raise UnknownModelError(
        f"unknown model '{name}'; available: {', '.join(available_models())}",
        available=available_models(),
    )
