"""Information geometric entropy of a geodesic flow.

Pipeline: geodesic box volumes vol(tau') -> running temporal average
avg_vol(tau) -> IGE = log(avg_vol) -> relative increments and the
asymptotic growth rate K_IG fitted over the tail of the series.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.stats import linregress

from igeflow.core.config import settings
from igeflow.core.errors import (
    DomainError,
    FitError,
    IgeflowError,
    QuadratureError,
    SeriesError,
)
from igeflow.geodesic import BoundsMode, GeodesicBounds, GeodesicPath, bounds_at
from igeflow.geometry import fisher_density_field
from igeflow.models.base import StatisticalModel
from igeflow.numerics.quadrature import integrate_box
from igeflow.schemas import IgeSummary

EXPONENTIAL = "exponential-volume-growth"
SUB_EXPONENTIAL = "sub-exponential"
MIN_FIT_POINTS = 10


@dataclass(frozen=True, eq=False)
class IgeSeries:
    """
    Per-tau series of the IGE pipeline.

    ``increments[k]`` compares the windows [tau_{k-1}, tau_k] and
    [tau_k, tau_{k+1}]; the first and last entries are NaN.
    """

    taus: np.ndarray
    vol: np.ndarray
    avg_vol: np.ndarray
    ige: np.ndarray
    increments: np.ndarray
    tau_burn: float = 0.0
    normalized: bool = False
    reference_volume: float = 1.0

    def __post_init__(self) -> None:
        m = len(self.taus)
        for name in ("vol", "avg_vol", "ige", "increments"):
            if len(getattr(self, name)) != m:
                raise SeriesError(
                    f"series field {name} has {len(getattr(self, name))} entries, expected {m}"
                )

    def __len__(self) -> int:
        return len(self.taus)


def _as_series(taus: Sequence[float], vol: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    taus = np.asarray(taus, dtype=float)
    vol = np.asarray(vol, dtype=float)
    if taus.ndim != 1 or taus.shape != vol.shape or len(taus) == 0:
        raise SeriesError(f"grid and volumes must be matching 1-D arrays, got {taus.shape} and {vol.shape}")
    if len(taus) > 1 and not np.all(np.diff(taus) > 0):
        raise SeriesError("grid must be strictly increasing")
    if not np.all(np.isfinite(vol)) or np.any(vol <= 0):
        bad = int(np.argmax(~np.isfinite(vol) | (vol <= 0)))
        raise SeriesError(
            f"volume must be positive, got {vol[bad]} at tau={taus[bad]}", tau=float(taus[bad])
        )
    return taus, vol


def _value_at(taus: np.ndarray, vol: np.ndarray, tau: float) -> float:
    """vol at tau: linear interpolation inside the grid, clamped extrapolation before it."""
    if tau >= taus[0]:
        return float(np.interp(tau, taus, vol))
    if len(taus) == 1:
        return float(vol[0])
    slope = (vol[1] - vol[0]) / (taus[1] - taus[0])
    return max(float(vol[0] + slope * (tau - taus[0])), 0.0)


def _segment(
    taus: np.ndarray, vol: np.ndarray, start: float, stop: float
) -> Tuple[np.ndarray, np.ndarray]:
    inside = (taus > start) & (taus < stop)
    xs = np.concatenate([[start], taus[inside], [stop]])
    ys = np.concatenate(
        [[_value_at(taus, vol, start)], vol[inside], [_value_at(taus, vol, stop)]]
    )
    return xs, ys


def _check_in_grid(taus: np.ndarray, tau: float, what: str) -> None:
    if tau > taus[-1] * (1.0 + 1e-12):
        raise SeriesError(f"{what}={tau} is beyond the grid end {taus[-1]}", tau=tau)


def averaged_volume(
    taus: Sequence[float], vol: Sequence[float], tau: float, tau_burn: float = 0.0
) -> float:
    """
    (1 / (tau - tau_burn)) * integral of vol from tau_burn to tau.

    Trapezoid rule on the grid. Before the first grid point the volume is
    extrapolated linearly from the first two samples (clamped at zero).
    """
    taus, vol = _as_series(taus, vol)
    if not tau > tau_burn:
        raise SeriesError(f"averaging needs tau > {tau_burn}, got {tau}", tau=tau)
    _check_in_grid(taus, tau, "tau")
    xs, ys = _segment(taus, vol, tau_burn, tau)
    return float(trapezoid(ys, xs)) / (tau - tau_burn)


def windowed_avg_volume(
    taus: Sequence[float], vol: Sequence[float], tau_m: float, tau_M: float
) -> float:
    """Average of vol over the window [tau_m, tau_M]."""
    taus, vol = _as_series(taus, vol)
    if not tau_M > tau_m:
        raise SeriesError(f"empty window [{tau_m}, {tau_M}]")
    if tau_m < taus[0] - 1e-12 * max(1.0, abs(taus[0])):
        raise SeriesError(f"window start {tau_m} precedes the grid start {taus[0]}")
    _check_in_grid(taus, tau_M, "tau_M")
    xs, ys = _segment(taus, vol, tau_m, tau_M)
    return float(trapezoid(ys, xs)) / (tau_M - tau_m)


def relative_increment(taus: Sequence[float], vol: Sequence[float], k: int) -> float:
    """
    (W_{k,k+1} - W_{k-1,k}) / W_{k-1,k} where W averages vol over one grid
    cell.
    """
    taus, vol = _as_series(taus, vol)
    if not 1 <= k <= len(taus) - 2:
        raise SeriesError(
            f"increment index {k} needs cells on both sides; valid range is 1..{len(taus) - 2}"
        )
    previous = windowed_avg_volume(taus, vol, taus[k - 1], taus[k])
    following = windowed_avg_volume(taus, vol, taus[k], taus[k + 1])
    if previous == 0.0:
        raise SeriesError(f"zero window average before tau={taus[k]}", tau=float(taus[k]))
    return (following - previous) / previous


def _increment_series(vol: np.ndarray) -> np.ndarray:
    out = np.full(len(vol), np.nan)
    if len(vol) >= 3:
        cells = 0.5 * (vol[:-1] + vol[1:])
        out[1:-1] = (cells[1:] - cells[:-1]) / cells[:-1]
    return out


def step_averaged_increment(taus: Sequence[float], vol: Sequence[float]) -> float:
    """Mean of relative_increment over every available step."""
    taus, vol = _as_series(taus, vol)
    if len(taus) < 3:
        raise SeriesError("step average needs at least two windows (three grid points)")
    steps = _increment_series(vol)[1:-1]
    return math.fsum(steps.tolist()) / len(steps)


def series_from_volumes(
    taus: Sequence[float], vol: Sequence[float], tau_burn: float = 0.0
) -> IgeSeries:
    """Assemble an IgeSeries from volumes on a grid; rows with tau <= tau_burn are dropped."""
    taus, vol = _as_series(taus, vol)
    if tau_burn < 0:
        raise SeriesError(f"tau_burn must be non-negative, got {tau_burn}")
    keep = taus > tau_burn
    if not np.any(keep):
        raise SeriesError(f"no grid point lies after tau_burn={tau_burn}")
    nodes = np.concatenate([[tau_burn], taus[keep]])
    values = np.concatenate([[_value_at(taus, vol, tau_burn)], vol[keep]])
    running = cumulative_trapezoid(values, nodes, initial=0.0)[1:]
    avg_vol = running / (taus[keep] - tau_burn)
    if np.any(avg_vol <= 0):
        raise SeriesError("averaged volume is not positive")
    return IgeSeries(
        taus=taus[keep],
        vol=vol[keep],
        avg_vol=avg_vol,
        ige=np.log(avg_vol),
        increments=_increment_series(vol[keep]),
        tau_burn=tau_burn,
    )


def instantaneous_volume(
    model: StatisticalModel, bounds: GeodesicBounds, rel_tol: Optional[float] = None
) -> float:
    """Integral of the Fisher density over the geodesic box."""
    rel_tol = settings.QUAD_REL_TOL if rel_tol is None else rel_tol
    box = bounds.box
    for k, (axis, dom) in enumerate(zip(box.axes, model.domain.axes)):
        if not (dom.lo < axis.lo and axis.hi < dom.hi):
            raise DomainError(
                f"box axis {k} {axis} leaves the domain axis {dom} at tau={bounds.tau}",
                axis=k,
                tau=bounds.tau,
            )

    if model.components:
        share = rel_tol / len(model.components)
        volume = 1.0
        for part, parts in zip(model.components, model.component_slices()):
            sub = GeodesicBounds(box.project(range(parts.start, parts.stop)), bounds.tau)
            volume *= instantaneous_volume(part, sub, share)
        return volume

    try:
        result = integrate_box(lambda pts: fisher_density_field(model, pts), box, rel_tol)
    except IgeflowError as exc:
        raise QuadratureError(
            f"volume over {box} at tau={bounds.tau:.12g} failed: {exc.message}",
            tau=bounds.tau,
        ) from exc
    if not result.converged:
        raise QuadratureError(
            f"volume over {box} at tau={bounds.tau:.12g} did not converge "
            f"(error estimate {result.error:.3g})",
            tau=bounds.tau,
        )
    return result.value


def ige_series(
    model: StatisticalModel,
    path: GeodesicPath,
    grid: Sequence[float],
    rel_tol: Optional[float] = None,
    *,
    bounds_mode: BoundsMode = "endpoint",
    tau_burn: float = 0.0,
    workers: Optional[int] = None,
) -> IgeSeries:
    """
    vol, running average and IGE on ``grid`` for one geodesic.

    Volumes are independent and evaluated on up to ``workers`` threads;
    results are placed by grid index so the series does not depend on
    evaluation order.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise SeriesError("grid must be a non-empty 1-D array")
    if not grid[0] > 0:
        raise SeriesError(f"grid must start after 0, got {grid[0]}")
    if len(grid) > 1 and not np.all(np.diff(grid) > 0):
        raise SeriesError("grid must be strictly increasing")
    if grid[-1] > path.end * (1.0 + 1e-12):
        raise SeriesError(
            f"grid end {grid[-1]} is beyond the geodesic end {path.end} ({path.status})"
        )

    def volume_at(tau: float) -> float:
        return instantaneous_volume(model, bounds_at(path, float(tau), bounds_mode), rel_tol)

    workers = workers or 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            volumes = list(pool.map(volume_at, grid))
    else:
        volumes = [volume_at(tau) for tau in grid]
    logger.debug(f"{len(grid)} geodesic volumes on {model.name} with {workers} worker(s)")
    return series_from_volumes(grid, volumes, tau_burn)


def estimate_kig(
    series: IgeSeries,
    window_fraction: Optional[float] = None,
    kig_threshold: Optional[float] = None,
    r2_threshold: Optional[float] = None,
    drift_tol: Optional[float] = None,
) -> IgeSummary:
    """
    Least-squares slope of the IGE over the tail of the series.

    Exponential volume growth is declared when the slope exceeds the
    threshold, the fit is linear (R^2) and the slope is stationary: the
    late and early halves of the window agree within ``drift_tol``.
    """
    window_fraction = settings.WINDOW_FRACTION if window_fraction is None else window_fraction
    kig_threshold = settings.KIG_THRESHOLD if kig_threshold is None else kig_threshold
    r2_threshold = settings.R2_THRESHOLD if r2_threshold is None else r2_threshold
    drift_tol = settings.KIG_DRIFT_TOL if drift_tol is None else drift_tol
    if not 0 < window_fraction <= 1:
        raise FitError(f"window_fraction must be in (0, 1], got {window_fraction}")

    n_fit = math.ceil(window_fraction * len(series))
    if n_fit < MIN_FIT_POINTS:
        raise FitError(
            f"fit window holds {n_fit} points, at least {MIN_FIT_POINTS} are needed",
            n_fit=n_fit,
        )
    taus = series.taus[-n_fit:]
    ige = series.ige[-n_fit:]
    fit = linregress(taus, ige)
    kig = float(fit.slope)
    r_squared = float(fit.rvalue) ** 2

    half = n_fit // 2
    early = float(linregress(taus[:half], ige[:half]).slope)
    late = float(linregress(taus[-half:], ige[-half:]).slope)
    drift = abs(late - early)

    exponential = (
        kig > kig_threshold and r_squared >= r2_threshold and drift <= drift_tol * abs(kig)
    )
    steps = series.increments[np.isfinite(series.increments)]
    step_avg = math.fsum(steps.tolist()) / len(steps) if len(steps) else float("nan")

    return IgeSummary(
        kig=kig,
        kig_stderr=float(fit.stderr),
        fit_window=(float(taus[0]), float(taus[-1])),
        regime=EXPONENTIAL if exponential else SUB_EXPONENTIAL,
        step_avg_increment=step_avg,
        normalized=series.normalized,
        r_squared=r_squared,
        kig_drift=drift,
        n_fit=n_fit,
    )


def running_kig(series: IgeSeries, window_fraction: Optional[float] = None) -> np.ndarray:
    """Tail-fit slope using only the samples up to each grid point (NaN while too short)."""
    window_fraction = settings.WINDOW_FRACTION if window_fraction is None else window_fraction
    out = np.full(len(series), np.nan)
    for i in range(len(series)):
        width = math.ceil(window_fraction * (i + 1))
        if width >= MIN_FIT_POINTS:
            lo = i + 1 - width
            out[i] = linregress(series.taus[lo : i + 1], series.ige[lo : i + 1]).slope
    return out


def normalize_complexity(series: IgeSeries, reference_volume: float) -> IgeSeries:
    """Express avg_vol in units of a reference volume, making it dimensionless."""
    if not reference_volume > 0 or not math.isfinite(reference_volume):
        raise SeriesError(f"reference volume must be positive, got {reference_volume}")
    return replace(
        series,
        avg_vol=series.avg_vol / reference_volume,
        ige=series.ige - math.log(reference_volume),
        normalized=True,
        reference_volume=series.reference_volume * reference_volume,
    )
