import math

import numpy as np
import pytest

from igeflow.core.errors import DomainError
from igeflow.models import (
    catalog,
    fisher_metric,
    fisher_metric_numeric,
    fisher_metric_quadrature,
    metric_field,
    relative_entropy,
)


def test_relative_entropy_of_identical_points_is_zero():
    for name, theta in [("gaussian_1d", [0.5, 2.0]), ("bernoulli", [0.2]), ("exponential_rate", [3.0])]:
        model = catalog(name)
        assert relative_entropy(model, np.array(theta), np.array(theta)) == 0.0


def test_relative_entropy_gaussian_closed_forms():
    model = catalog("gaussian_1d")
    assert relative_entropy(model, np.array([0.0, 1.0]), np.array([1.0, 1.0])) == pytest.approx(
        -0.5, abs=1e-6
    )
    assert relative_entropy(model, np.array([0.0, 1.0]), np.array([0.0, 2.0])) == pytest.approx(
        -(math.log(2.0) + 0.125 - 0.5), abs=1e-6
    )


@pytest.mark.parametrize(
    "name, theta_prime, theta",
    [
        ("gaussian_1d", [0.0, 1.0], [0.4, 1.5]),
        ("exponential_rate", [2.0], [0.7]),
        ("bernoulli", [0.3], [0.6]),
    ],
)
def test_relative_entropy_quadrature_matches_closed_form(name, theta_prime, theta):
    model = catalog(name)
    exact = relative_entropy(model, np.array(theta_prime), np.array(theta))
    numeric = relative_entropy(model, np.array(theta_prime), np.array(theta), method="quadrature")
    assert exact < 0.0
    assert numeric == pytest.approx(exact, abs=1e-6)


def test_relative_entropy_is_never_positive():
    model = catalog("gaussian_product_2")
    rng = np.random.default_rng(3)
    points = model.domain.sample(rng, 20)
    for a, b in zip(points[:-1], points[1:]):
        assert relative_entropy(model, a, b) < 0.0


def test_relative_entropy_requires_interior_points():
    with pytest.raises(DomainError):
        relative_entropy(catalog("gaussian_1d"), np.array([0.0, -1.0]), np.array([0.0, 1.0]))


@pytest.mark.parametrize(
    "name, theta, expected",
    [
        ("gaussian_1d", [0.0, 1.0], [[1.0, 0.0], [0.0, 2.0]]),
        ("gaussian_1d", [3.0, 2.0], [[0.25, 0.0], [0.0, 0.5]]),
        ("exponential_rate", [2.0], [[0.25]]),
        ("bernoulli", [0.5], [[4.0]]),
    ],
)
def test_closed_form_metrics(name, theta, expected):
    metric = fisher_metric(catalog(name), np.array(theta))
    assert np.allclose(metric, expected, rtol=1e-12, atol=1e-14)


def test_fisher_metric_outside_domain():
    with pytest.raises(DomainError):
        fisher_metric(catalog("bernoulli"), np.array([1.0]))


@pytest.mark.parametrize(
    "name, theta, h, expected, tol",
    [
        ("gaussian_1d", [0.0, 1.0], 1e-3, [[1.0, 0.0], [0.0, 2.0]], 1e-4),
        ("gaussian_mean_only", [7.0], 1e-3, [[1.0]], 1e-6),
        ("exponential_rate", [1.0], 1e-4, [[1.0]], 1e-4),
    ],
)
def test_numeric_metric_examples(name, theta, h, expected, tol):
    metric = fisher_metric_numeric(catalog(name), np.array(theta), h)
    assert np.allclose(metric, expected, rtol=0.0, atol=tol)


def test_numeric_metric_needs_room_near_the_boundary():
    with pytest.raises(DomainError):
        fisher_metric_numeric(catalog("bernoulli"), np.array([1e-4]), h=0.6)


@pytest.mark.parametrize("name", ["gaussian_1d", "gaussian_mean_only", "exponential_rate", "bernoulli", "gaussian_product_2"])
def test_closed_form_and_numeric_metrics_agree(name):
    model = catalog(name)
    for theta in model.domain.sample(np.random.default_rng(11), 20):
        closed = fisher_metric(model, theta)
        numeric = fisher_metric_numeric(model, theta)
        assert np.max(np.abs(closed - numeric)) < 1e-4
        assert np.max(np.abs(closed - closed.T)) <= 1e-10
        assert np.all(np.linalg.eigvalsh(closed) > 0.0)


@pytest.mark.parametrize(
    "name, count",
    [("gaussian_1d", 20), ("exponential_rate", 20), ("bernoulli", 20), ("gaussian_product_2", 4)],
)
def test_closed_form_metric_matches_score_covariance(name, count):
    model = catalog(name)
    for theta in model.domain.sample(np.random.default_rng(5), count):
        closed = fisher_metric(model, theta)
        direct = fisher_metric_quadrature(model, theta)
        assert np.max(np.abs(closed - direct)) < 1e-4


def test_metric_field_matches_pointwise_metric():
    model = catalog("gaussian_product_2")
    thetas = model.domain.sample(np.random.default_rng(2), 8)
    stacked = metric_field(model, thetas)
    assert stacked.shape == (8, 4, 4)
    for theta, metric in zip(thetas, stacked):
        assert np.allclose(metric, fisher_metric(model, theta), rtol=1e-15)
