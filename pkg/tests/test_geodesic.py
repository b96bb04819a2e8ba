import math

import numpy as np
import pytest
from loguru import logger

from igeflow.core.errors import DegenerateAxisError, DomainError
from igeflow.geodesic import arc_length, bounds_at, integrate_geodesic, speed_drift
from igeflow.models import catalog, reparametrize
from igeflow.models.base import ParameterDomain
from igeflow.numerics import Interval

SQRT2 = math.sqrt(2.0)


def test_flat_geodesic_is_a_straight_line():
    path = integrate_geodesic(catalog("gaussian_mean_only"), np.array([0.0]), np.array([1.0]), 5.0)
    assert path.status == "complete"
    assert path.end == 5.0
    assert path.theta[-1, 0] == pytest.approx(5.0, abs=1e-8)
    assert np.max(np.abs(path.theta[:, 0] - path.s)) < 1e-10


def test_vertical_gaussian_geodesic():
    path = integrate_geodesic(
        catalog("gaussian_1d"),
        np.array([0.0, 1.0]),
        np.array([0.0, 1.0 / SQRT2]),
        5.0,
        rel_tol=1e-10,
        checkpoints=[1.0],
    )
    assert path.speed == pytest.approx(1.0, rel=1e-14)
    at_one = path.position(1.0)
    assert at_one[0] == pytest.approx(0.0, abs=1e-12)
    assert at_one[1] == pytest.approx(math.exp(1.0 / SQRT2), rel=1e-6)
    assert path.theta[-1, 1] == pytest.approx(math.exp(5.0 / SQRT2), rel=1e-6)


def test_generic_gaussian_geodesic_is_a_half_circle():
    path = integrate_geodesic(
        catalog("gaussian_1d"), np.array([0.0, 1.0]), np.array([1.0, 0.5]), 5.0, rel_tol=1e-10
    )
    x = path.theta[:, 0] / SQRT2
    sigma = path.theta[:, 1]
    i, j = 0, len(x) // 2
    centre = (x[j] ** 2 + sigma[j] ** 2 - x[i] ** 2 - sigma[i] ** 2) / (2.0 * (x[j] - x[i]))
    radius2 = (x[i] - centre) ** 2 + sigma[i] ** 2
    residual = (x - centre) ** 2 + sigma**2 - radius2
    assert np.max(np.abs(residual)) < 1e-6


@pytest.mark.parametrize(
    "name, theta0, theta_dot0",
    [
        ("gaussian_mean_only", [1.0], [-2.0]),
        ("gaussian_1d", [0.0, 1.0], [1.0, 0.5]),
        ("exponential_rate", [2.0], [1.0]),
        ("gaussian_product_2", [0.0, 1.0, 1.0, 2.0], [1.0, 0.5, -0.3, 0.2]),
    ],
)
def test_speed_is_conserved(name, theta0, theta_dot0):
    model = catalog(name)
    path = integrate_geodesic(
        model, np.array(theta0), np.array(theta_dot0), 10.0, rel_tol=1e-8, max_step=0.05
    )
    assert path.status == "complete"
    assert path.speed == pytest.approx(1.0, rel=1e-12)
    assert speed_drift(path, model) < 1e-6
    assert arc_length(path, model) == pytest.approx(10.0, rel=1e-6)


def test_doubling_velocity_halves_the_parameter():
    model = catalog("gaussian_1d")
    theta0, v = np.array([0.0, 1.0]), np.array([0.4, -0.2])
    slow = integrate_geodesic(model, theta0, v, 2.0, 1e-11, normalize=False, checkpoints=[1.0])
    fast = integrate_geodesic(model, theta0, 2.0 * v, 1.0, 1e-11, normalize=False, checkpoints=[0.5])
    assert np.allclose(fast.position(0.5), slow.position(1.0), rtol=0.0, atol=1e-7)
    assert np.allclose(fast.theta[-1], slow.theta[-1], rtol=0.0, atol=1e-7)


def test_time_reversal_returns_to_the_start():
    model = catalog("gaussian_1d")
    theta0 = np.array([0.5, 1.5])
    forward = integrate_geodesic(model, theta0, np.array([1.0, 0.3]), 2.0, 1e-10)
    back = integrate_geodesic(
        model, forward.theta[-1], -forward.theta_dot[-1], 2.0, 1e-10, normalize=False
    )
    assert np.allclose(back.theta[-1], theta0, rtol=0.0, atol=1e-6)


def test_position_interpolates_between_samples():
    model = catalog("gaussian_1d")
    theta0, v = np.array([0.0, 1.0]), np.array([1.0, 0.5])
    coarse = integrate_geodesic(model, theta0, v, 3.0, 1e-10)
    exact = integrate_geodesic(model, theta0, v, 3.0, 1e-10, checkpoints=[1.37])
    assert 1.37 not in coarse.s.tolist()
    assert np.allclose(coarse.position(1.37), exact.position(1.37), rtol=0.0, atol=1e-6)


def test_leaving_the_domain_truncates_the_path():
    log_messages = []

    def sink(message):
        log_messages.append(message)

    logger.remove()
    logger.add(sink, level="WARNING")

    flat = catalog("gaussian_mean_only")
    boxed = reparametrize(
        flat,
        lambda t: t,
        lambda t: t,
        lambda t: np.eye(1),
        domain=ParameterDomain((Interval(-1.0, 1.0),)),
        name="boxed_mean",
    )
    path = integrate_geodesic(boxed, np.array([0.0]), np.array([1.0]), 3.0)
    assert path.status == "domain_exit"
    assert 0.99 < path.end < 1.0
    assert path.message
    assert any("truncated" in message for message in log_messages)


def test_invalid_initial_conditions():
    model = catalog("gaussian_1d")
    with pytest.raises(DomainError):
        integrate_geodesic(model, np.array([0.0, -1.0]), np.array([1.0, 0.0]), 1.0)
    with pytest.raises(DomainError):
        integrate_geodesic(model, np.array([0.0, 1.0]), np.array([0.0, 0.0]), 1.0)
    with pytest.raises(DomainError):
        integrate_geodesic(model, np.array([0.0, 1.0]), np.array([1.0]), 1.0)
    with pytest.raises(ValueError):
        integrate_geodesic(model, np.array([0.0, 1.0]), np.array([1.0, 0.0]), 0.0)
    with pytest.raises(DomainError):
        integrate_geodesic(model, np.array([0.0, 1.0]), np.array([1e-200, 0.0]), 1.0)


def test_bounds_of_a_flat_path():
    path = integrate_geodesic(catalog("gaussian_mean_only"), np.array([0.0]), np.array([1.0]), 5.0, checkpoints=[3.0])
    bounds = bounds_at(path, 3.0)
    assert bounds.tau == 3.0
    assert bounds.box.axes[0].lo == 0.0
    assert bounds.box.axes[0].hi == pytest.approx(3.0, abs=1e-12)


def test_vertical_geodesic_has_a_degenerate_axis():
    path = integrate_geodesic(catalog("gaussian_1d"), np.array([0.0, 1.0]), np.array([0.0, 1.0]), 2.0)
    with pytest.raises(DegenerateAxisError) as info:
        bounds_at(path, 1.0)
    assert info.value.axis == 0
    assert info.value.tau == 1.0


def test_bounds_beyond_the_path_end():
    path = integrate_geodesic(catalog("gaussian_mean_only"), np.array([0.0]), np.array([1.0]), 2.0)
    with pytest.raises(DomainError):
        bounds_at(path, 2.5)
    with pytest.raises(DomainError):
        bounds_at(path, 0.0)


def test_mixed_geodesic_bounds_are_converged():
    model = catalog("gaussian_1d")
    theta0, v = np.array([0.0, 1.0]), np.array([1.0 / SQRT2, 0.5 / SQRT2])
    path = integrate_geodesic(model, theta0, v, 2.0, checkpoints=[1.0])
    reference = integrate_geodesic(model, theta0, v, 2.0, 1e-12, abs_tol=1e-14, checkpoints=[1.0])
    widths = bounds_at(path, 1.0).box.widths
    assert np.all(widths > 0.0)
    assert np.allclose(widths, bounds_at(reference, 1.0).box.widths, rtol=0.0, atol=1e-6)


def test_envelope_bounds_cover_the_turning_point():
    model = catalog("gaussian_1d")
    path = integrate_geodesic(
        model, np.array([0.0, 1.0]), np.array([1.0, 0.5]), 3.0, rel_tol=1e-10
    )
    endpoint = bounds_at(path, 3.0, "endpoint").box
    envelope = bounds_at(path, 3.0, "envelope").box
    assert envelope.axes[1].hi > endpoint.axes[1].hi
    assert abs(envelope.axes[1].hi - math.sqrt(1.5)) < 1e-8
    assert np.all(envelope.lower <= endpoint.lower)


def test_envelope_finds_extrema_between_checkpoints():
    model = catalog("gaussian_1d")
    grid = [(i + 1) / 200 * 20.0 for i in range(200)]
    path = integrate_geodesic(
        model, np.array([0.0, 1.0]), np.array([1.0, 0.5]), 20.0, rel_tol=1e-10, checkpoints=grid
    )
    assert set(path.turn_axis.tolist()) == {1}
    peak = float(path.turn_s[0])
    assert path.position(peak)[1] == pytest.approx(path.turn_value[0], abs=1e-4)
    for tau in (peak, 10.0, 20.0):
        box = bounds_at(path, tau, "envelope").box
        assert abs(box.axes[1].hi - math.sqrt(1.5)) < 1e-8
