import math

import numpy as np
import pytest

from igeflow.core.errors import DegenerateAxisError, DomainError, FitError, SeriesError
from igeflow.geodesic import GeodesicBounds, integrate_geodesic
from igeflow.ige import (
    EXPONENTIAL,
    SUB_EXPONENTIAL,
    IgeSeries,
    averaged_volume,
    estimate_kig,
    ige_series,
    instantaneous_volume,
    normalize_complexity,
    relative_increment,
    running_kig,
    series_from_volumes,
    step_averaged_increment,
    windowed_avg_volume,
)
from igeflow.models import catalog, log_scale_chart
from igeflow.numerics import HyperRectangle

SQRT2 = math.sqrt(2.0)


def bounds(lo, hi, tau=1.0):
    return GeodesicBounds(HyperRectangle.from_bounds(lo, hi), tau)


def flat_series(tau_max=100.0, points=200):
    taus = np.linspace(tau_max / points, tau_max, points)
    return series_from_volumes(taus, taus)


def test_flat_volume():
    assert instantaneous_volume(catalog("gaussian_mean_only"), bounds([0.0], [3.0])) == pytest.approx(3.0, rel=1e-12)


@pytest.mark.parametrize("sigma_hi", [2.0, math.e])
def test_gaussian_box_volume(sigma_hi):
    volume = instantaneous_volume(catalog("gaussian_1d"), bounds([0.0, 1.0], [1.0, sigma_hi]))
    assert volume == pytest.approx(SQRT2 * (1.0 - 1.0 / sigma_hi), abs=1e-6)


def test_product_volume_factorizes():
    product = catalog("gaussian_product_2")
    box = bounds([0.0, 1.0, -1.0, 0.5], [1.0, 2.0, 2.0, 3.0])
    expected = SQRT2 * 0.5 * 3.0 * SQRT2 * (1.0 / 0.5 - 1.0 / 3.0)
    assert instantaneous_volume(product, box) == pytest.approx(expected, rel=1e-6)


def test_volume_box_must_lie_inside_the_domain():
    with pytest.raises(DomainError):
        instantaneous_volume(catalog("gaussian_1d"), bounds([0.0, -1.0], [1.0, 1.0]))


def test_volume_is_invariant_under_log_sigma_chart():
    model = catalog("gaussian_1d")
    chart = log_scale_chart(model, [1])
    rng = np.random.default_rng(12)
    for _ in range(10):
        mu = np.sort(rng.uniform(-2.0, 2.0, 2))
        sigma = np.sort(rng.uniform(0.3, 3.0, 2))
        original = instantaneous_volume(model, bounds([mu[0], sigma[0]], [mu[1], sigma[1]]))
        mapped = instantaneous_volume(
            chart, bounds([mu[0], math.log(sigma[0])], [mu[1], math.log(sigma[1])])
        )
        assert mapped == pytest.approx(original, rel=1e-5)


def test_averaged_volume_examples():
    taus = np.linspace(0.1, 10.0, 100)
    assert averaged_volume(taus, np.full(100, 2.5), 7.3) == pytest.approx(2.5, rel=1e-12)
    assert averaged_volume(taus, taus, 4.0) == pytest.approx(2.0, rel=1e-12)
    fine = np.linspace(1e-3, 10.0, 10000)
    assert averaged_volume(fine, np.exp(fine), 10.0) == pytest.approx((math.exp(10.0) - 1.0) / 10.0, rel=1e-3)


def test_averaged_volume_errors():
    taus = np.linspace(1.0, 5.0, 5)
    with pytest.raises(SeriesError):
        averaged_volume(taus, taus, 0.0)
    with pytest.raises(SeriesError):
        averaged_volume(taus, taus, 6.0)
    with pytest.raises(SeriesError):
        averaged_volume(taus, np.array([1.0, 2.0, 0.0, 1.0, 1.0]), 3.0)


def test_averaged_volume_after_burn_in():
    taus = np.linspace(0.5, 10.0, 20)
    assert averaged_volume(taus, taus, 10.0, tau_burn=4.0) == pytest.approx(7.0, rel=1e-12)


def test_windowed_average_examples():
    taus = np.linspace(0.0, 5.0, 51)
    assert windowed_avg_volume(taus, np.full(51, 4.0), 1.0, 3.0) == pytest.approx(4.0)
    assert windowed_avg_volume(taus, taus, 2.0, 4.0) == pytest.approx(3.0, rel=1e-12)
    fine = np.linspace(0.0, 1.0, 1001)
    assert windowed_avg_volume(fine, np.exp(fine), 0.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-3)
    with pytest.raises(SeriesError):
        windowed_avg_volume(taus, taus, 3.0, 3.0)


def test_relative_increment_examples():
    dt = 0.1
    taus = dt * np.arange(1, 51)
    assert relative_increment(taus, np.full(50, 3.0), 10) == pytest.approx(0.0, abs=1e-14)
    rate = 0.3
    for k in (1, 17, 48):
        assert relative_increment(taus, np.exp(rate * taus), k) == pytest.approx(
            math.exp(rate * dt) - 1.0, abs=1e-6
        )
        assert relative_increment(taus, taus, k) == pytest.approx(dt / (taus[k] - dt / 2.0), abs=1e-8)
    with pytest.raises(SeriesError):
        relative_increment(taus, taus, 0)
    with pytest.raises(SeriesError):
        relative_increment(taus, taus, 49)


def test_step_averaged_increment_examples():
    dt = 0.05
    taus = dt * np.arange(1, 201)
    assert step_averaged_increment(taus, np.ones(200)) == 0.0
    assert step_averaged_increment(taus, np.exp(0.3 * taus)) == pytest.approx(
        math.exp(0.3 * dt) - 1.0, abs=1e-6
    )
    short = step_averaged_increment(taus[:100], taus[:100])
    long = step_averaged_increment(taus, taus)
    assert 0.0 < long < short
    with pytest.raises(SeriesError):
        step_averaged_increment(taus[:2], taus[:2])


def test_step_averaged_increment_is_shift_invariant():
    dt = 0.1
    taus = dt * np.arange(1, 101)
    base = step_averaged_increment(taus, np.exp(0.3 * taus))
    shifted = step_averaged_increment(taus + 7.3, np.exp(0.3 * (taus + 7.3)))
    assert shifted == pytest.approx(base, abs=1e-8)


def test_flat_series_has_log_growth():
    series = flat_series()
    assert np.allclose(series.ige, np.log(series.taus / 2.0), rtol=0.0, atol=1e-12)
    assert np.isnan(series.increments[0]) and np.isnan(series.increments[-1])
    assert np.all(np.isfinite(series.increments[1:-1]))
    tail = series.ige - np.log(series.taus)
    window = (series.taus >= 50.0) & (series.taus <= 100.0)
    assert np.ptp(tail[window]) < 1e-3


def test_exponential_consistency():
    taus = np.linspace(0.1, 30.0, 300)
    series = series_from_volumes(taus, np.exp(0.2 * taus) + taus)
    assert np.allclose(np.exp(series.ige), series.avg_vol, rtol=1e-12, atol=0.0)


def test_series_drops_rows_inside_the_burn_in():
    taus = np.linspace(1.0, 10.0, 10)
    series = series_from_volumes(taus, taus, tau_burn=3.0)
    assert series.taus[0] == 4.0
    assert len(series) == 7
    assert series.avg_vol[-1] == pytest.approx(6.5, rel=1e-12)
    assert series.tau_burn == 3.0


def test_flat_series_fit_is_sub_exponential():
    summary = estimate_kig(flat_series())
    assert summary.kig < 2e-2
    assert summary.regime == SUB_EXPONENTIAL
    assert summary.fit_window == (pytest.approx(50.5), 100.0)
    assert summary.n_fit == 100


def test_synthetic_exponential_fit():
    taus = np.linspace(0.1, 200.0, 2000)
    series = series_from_volumes(taus, np.exp(0.3 * taus))
    summary = estimate_kig(series)
    assert summary.kig == pytest.approx(0.3, abs=0.01)
    assert summary.regime == EXPONENTIAL
    assert summary.r_squared > 0.99
    steps = series.increments[1:-1]
    assert np.allclose(steps, math.exp(0.3 * (taus[1] - taus[0])) - 1.0, rtol=0.0, atol=1e-6)


def test_exactly_linear_ige():
    taus = np.linspace(1.0, 20.0, 40)
    ige = 0.7 * taus + 1.0
    series = IgeSeries(
        taus=taus,
        vol=np.exp(ige),
        avg_vol=np.exp(ige),
        ige=ige,
        increments=np.full(40, np.nan),
    )
    summary = estimate_kig(series, window_fraction=1.0)
    assert summary.kig == pytest.approx(0.7, abs=1e-12)
    assert summary.kig_stderr == pytest.approx(0.0, abs=1e-10)
    assert summary.regime == EXPONENTIAL
    assert math.isnan(summary.step_avg_increment)


def test_fit_needs_enough_points():
    taus = np.linspace(1.0, 15.0, 15)
    with pytest.raises(FitError):
        estimate_kig(series_from_volumes(taus, taus), window_fraction=0.5)
    with pytest.raises(FitError):
        estimate_kig(flat_series(), window_fraction=0.0)


def test_running_kig_ends_at_the_fitted_slope():
    series = flat_series()
    running = running_kig(series)
    assert np.isnan(running[:18]).all()
    assert np.all(np.isfinite(running[19:]))
    assert running[-1] == pytest.approx(estimate_kig(series).kig, rel=1e-12)


def test_normalization():
    series = flat_series()
    same = normalize_complexity(series, 1.0)
    assert np.array_equal(same.ige, series.ige)
    assert same.normalized
    shifted = normalize_complexity(series, math.e)
    assert np.allclose(shifted.ige, series.ige - 1.0, rtol=0.0, atol=1e-15)
    assert np.array_equal(shifted.increments, series.increments, equal_nan=True)
    reference = normalize_complexity(series, 50.0)
    assert reference.ige[-1] == pytest.approx(0.0, abs=1e-10)
    assert estimate_kig(reference).normalized
    with pytest.raises(SeriesError):
        normalize_complexity(series, 0.0)


def test_flat_pipeline_end_to_end():
    model = catalog("gaussian_mean_only")
    grid = np.linspace(0.5, 100.0, 200)
    path = integrate_geodesic(model, np.array([0.0]), np.array([1.0]), 100.0, checkpoints=grid)
    series = ige_series(model, path, grid)
    assert np.allclose(series.ige, np.log(grid / 2.0), rtol=0.0, atol=1e-4)
    summary = estimate_kig(series)
    assert summary.kig < 2e-2
    assert summary.regime == SUB_EXPONENTIAL


def test_single_grid_point():
    model = catalog("gaussian_mean_only")
    path = integrate_geodesic(model, np.array([0.0]), np.array([1.0]), 3.0, checkpoints=[2.0])
    series = ige_series(model, path, [2.0])
    assert len(series) == 1
    assert series.ige[0] == pytest.approx(math.log(series.avg_vol[0]))
    assert series.avg_vol[0] == pytest.approx(2.0, rel=1e-12)


def test_degenerate_axis_names_the_tau():
    model = catalog("gaussian_1d")
    path = integrate_geodesic(model, np.array([0.0, 1.0]), np.array([0.0, 1.0]), 2.0)
    with pytest.raises(DegenerateAxisError) as info:
        ige_series(model, path, np.linspace(0.2, 2.0, 10))
    assert info.value.tau == pytest.approx(0.2)


def test_grid_must_fit_the_path():
    model = catalog("gaussian_mean_only")
    path = integrate_geodesic(model, np.array([0.0]), np.array([1.0]), 2.0)
    with pytest.raises(SeriesError):
        ige_series(model, path, [1.0, 3.0])
    with pytest.raises(SeriesError):
        ige_series(model, path, [0.0, 1.0])


def test_mixed_gaussian_pipeline():
    model = catalog("gaussian_1d")
    results = []
    for points in (200, 400):
        grid = np.linspace(6.0 / points, 6.0, points)
        path = integrate_geodesic(
            model, np.array([0.0, 1.0]), np.array([1.0, 0.5]), 6.0, checkpoints=grid
        )
        results.append(ige_series(model, path, grid, workers=4))
    coarse, fine = results
    tail = coarse.ige[len(coarse) // 2 :]
    assert np.all(np.diff(tail) > 0.0)
    assert abs(coarse.ige[-1] - fine.ige[-1]) < 1e-4


def test_parallel_volumes_match_serial():
    model = catalog("gaussian_1d")
    grid = np.linspace(0.1, 3.0, 30)
    path = integrate_geodesic(model, np.array([0.0, 1.0]), np.array([1.0, 0.5]), 3.0, checkpoints=grid)
    serial = ige_series(model, path, grid, workers=1)
    parallel = ige_series(model, path, grid, workers=8)
    assert np.array_equal(serial.vol, parallel.vol)
    assert np.array_equal(serial.ige, parallel.ige)
