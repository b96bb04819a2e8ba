"""Adaptive tensor-product Gauss-Legendre quadrature over hyperrectangles.

Each panel uses the 7-point rule on every axis. The error of a panel is
estimated per axis from the two highest Legendre coefficients of the
weighted marginal profile along that axis; the worst panel is bisected
along its worst axis until the summed estimate meets the tolerance.
"""

import heapq
import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from loguru import logger
from numpy.polynomial import legendre

from igeflow.core.errors import QuadratureError
from igeflow.numerics.intervals import HyperRectangle

# f(points) with points of shape (m, n) returns values of shape (m,)
ScalarField = Callable[[np.ndarray], np.ndarray]

GAUSS_POINTS = 7
_NODES, _WEIGHTS = legendre.leggauss(GAUSS_POINTS)
# projection onto P_0..P_6: coefficients c_j = sum_i _PROJ[j, i] g(x_i)
_PROJ = (
    (2 * np.arange(GAUSS_POINTS) + 1)[:, None]
    / 2.0
    * legendre.legvander(_NODES, GAUSS_POINTS - 1).T
    * _WEIGHTS[None, :]
)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    panels: int
    converged: bool


@dataclass(frozen=True)
class _Panel:
    box: HyperRectangle
    value: float
    axis_errors: np.ndarray

    @property
    def error(self) -> float:
        return float(np.sum(self.axis_errors))


def _panel_points(box: HyperRectangle) -> np.ndarray:
    half = 0.5 * box.widths
    mid = 0.5 * (box.lower + box.upper)
    axes = [mid[k] + half[k] * _NODES for k in range(box.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def _evaluate_panel(f: ScalarField, box: HyperRectangle) -> _Panel:
    n = box.dim
    points = _panel_points(box)
    values = np.asarray(f(points), dtype=float).reshape(-1)
    if values.shape[0] != points.shape[0]:
        raise QuadratureError(
            f"integrand returned {values.shape[0]} values for {points.shape[0]} points"
        )
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = points[int(np.argmax(bad))]
        raise QuadratureError(
            f"non-finite integrand at {where.tolist()}", point=where.tolist()
        )

    jac = float(np.prod(0.5 * box.widths))
    grid = values.reshape((GAUSS_POINTS,) * n)
    total = grid
    for _ in range(n):
        total = np.tensordot(total, _WEIGHTS, axes=([0], [0]))
    value = jac * float(total)

    axis_errors = np.empty(n)
    for k in range(n):
        profile = np.moveaxis(grid, k, 0)
        for _ in range(n - 1):
            profile = np.tensordot(profile, _WEIGHTS, axes=([1], [0]))
        coeffs = _PROJ @ profile
        axis_errors[k] = jac * (abs(coeffs[-1]) + abs(coeffs[-2]))
    return _Panel(box, value, axis_errors)


def integrate_box(
    f: ScalarField,
    box: HyperRectangle,
    rel_tol: float = 1e-6,
    abs_tol: float = 1e-15,
    max_panels: int = 4096,
) -> QuadratureResult:
    """
    Estimate the integral of ``f`` over ``box``.

    ``f`` is vectorized: it receives an (m, n) array of points and returns
    m values. When the panel budget runs out the best estimate is returned
    with ``converged=False``.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")

    root = _evaluate_panel(f, box)
    heap: List[Tuple[float, int, _Panel]] = [(-root.error, 0, root)]
    live = {0: root}
    next_id = 1
    total = root.value
    error = root.error

    while error > max(rel_tol * abs(total), abs_tol) and len(live) < max_panels:
        _, pid, worst = heapq.heappop(heap)
        del live[pid]
        axis = int(np.argmax(worst.axis_errors))
        total -= worst.value
        error -= worst.error
        for child_box in worst.box.split(axis):
            child = _evaluate_panel(f, child_box)
            live[next_id] = child
            heapq.heappush(heap, (-child.error, next_id, child))
            next_id += 1
            total += child.value
            error += child.error

    # fixed summation order keeps results independent of heap history
    ordered = [live[i] for i in sorted(live)]
    value = math.fsum(p.value for p in ordered)
    error = math.fsum(p.error for p in ordered)
    converged = error <= max(rel_tol * abs(value), abs_tol)
    if not converged:
        logger.warning(
            f"quadrature budget of {max_panels} panels exhausted on {box}: "
            f"value={value:.12g}, error={error:.3g}"
        )
    return QuadratureResult(value, error, len(ordered), converged)


def vectorize_field(f: Callable[[np.ndarray], float]) -> ScalarField:
    """Lift a pointwise scalar field to the vectorized calling convention."""

    def batched(points: np.ndarray) -> np.ndarray:
        return np.array([float(f(p)) for p in points])

    return batched
