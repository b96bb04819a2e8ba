from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from igeflow.core.config import settings
from igeflow.core.errors import DomainError
from igeflow.numerics.intervals import Interval

# log p(x | theta): x has shape (m, d) for d-dimensional microstates
LogDensity = Callable[[np.ndarray, np.ndarray], np.ndarray]
# theta (..., n) -> g (..., n, n)
MetricField = Callable[[np.ndarray], np.ndarray]
# theta (n,) -> dg (n, n, n) with dg[l, i, j] = d g_ij / d theta^l
MetricDerivative = Callable[[np.ndarray], np.ndarray]
# (theta_prime, theta) -> S(theta', theta)
EntropyFunction = Callable[[np.ndarray, np.ndarray], float]
# theta -> (location, scale) per microstate axis
LocationScale = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ParameterDomain:
    """Product of open intervals, the total parameter space of a model."""

    axes: Tuple[Interval, ...]

    @property
    def dim(self) -> int:
        return len(self.axes)

    def contains(self, theta: np.ndarray, margin: Optional[float] = None) -> bool:
        margin = settings.BOUNDARY_MARGIN if margin is None else margin
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            return False
        return all(axis.contains(float(x), margin) for axis, x in zip(self.axes, theta))

    def require_interior(
        self, theta: np.ndarray, margin: Optional[float] = None, what: str = "theta"
    ) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            raise DomainError(
                f"{what} has {theta.size} coordinates, the domain has {self.dim}",
                point=theta.tolist(),
            )
        if not self.contains(theta, margin):
            raise DomainError(
                f"{what}={theta.tolist()} is not interior to {self}",
                point=theta.tolist(),
            )
        return theta

    def require_margin(self, theta: np.ndarray, steps: np.ndarray, reach: float) -> None:
        """Check that theta +/- reach*steps[k] e_k stays inside on every axis."""
        for k, axis in enumerate(self.axes):
            offset = reach * steps[k]
            if not (
                axis.contains(theta[k] - offset, 0.0)
                and axis.contains(theta[k] + offset, 0.0)
            ):
                raise DomainError(
                    f"theta={theta.tolist()} is within {reach:g} finite-difference "
                    f"steps of the boundary on axis {k}",
                    point=theta.tolist(),
                    axis=k,
                )

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Random interior points, away from the boundary."""
        cols = []
        for axis in self.axes:
            if axis.is_finite:
                pad = 0.05 * axis.width
                cols.append(rng.uniform(axis.lo + pad, axis.hi - pad, count))
            elif np.isfinite(axis.lo):
                cols.append(axis.lo + rng.uniform(0.3, 3.0, count))
            elif np.isfinite(axis.hi):
                cols.append(axis.hi - rng.uniform(0.3, 3.0, count))
            else:
                cols.append(rng.uniform(-3.0, 3.0, count))
        return np.stack(cols, axis=-1)

    def __str__(self) -> str:
        return "x".join(str(a) for a in self.axes)


@dataclass(frozen=True)
class ContinuousSampleSpace:
    """Microstates in a product of intervals (one per microstate axis)."""

    axes: Tuple[Interval, ...]

    @property
    def dim(self) -> int:
        return len(self.axes)

    def __str__(self) -> str:
        return "x".join(str(a) for a in self.axes)


@dataclass(frozen=True)
class FiniteSampleSpace:
    """Finitely many microstates, stored as rows of ``values``."""

    values: Tuple[float, ...]

    def points(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float).reshape(-1, 1)

    def __str__(self) -> str:
        return "{" + ",".join(f"{v:g}" for v in self.values) + "}"


SampleSpace = Union[ContinuousSampleSpace, FiniteSampleSpace]


@dataclass(frozen=True)
class StatisticalModel:
    """
    A parametric family p(X | theta) on a statistical manifold.

    ``closed_form_metric`` accepts stacked points (..., n) when
    ``vectorized`` is set; otherwise it is called point by point.
    ``components`` lists the independent factors of a product family.
    """

    name: str
    dim: int
    domain: ParameterDomain
    sample_space: SampleSpace
    log_density: LogDensity
    closed_form_metric: Optional[MetricField] = None
    metric_derivative: Optional[MetricDerivative] = None
    closed_form_entropy: Optional[EntropyFunction] = None
    location_scale: Optional[LocationScale] = None
    components: Tuple["StatisticalModel", ...] = field(default=())
    vectorized: bool = False
    description: str = ""

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"model {self.name}: dim must be positive")
        if self.domain.dim != self.dim:
            raise ValueError(
                f"model {self.name}: domain has {self.domain.dim} axes, dim is {self.dim}"
            )

    @property
    def has_closed_form_metric(self) -> bool:
        return self.closed_form_metric is not None

    def component_slices(self) -> Sequence[slice]:
        """Parameter slices of each component of a product family."""
        slices = []
        start = 0
        for part in self.components:
            slices.append(slice(start, start + part.dim))
            start += part.dim
        return slices

    def total_probability(self, theta: np.ndarray) -> float:
        """Integral (or sum) of p(X | theta) over the sample space."""
        from igeflow.models.expectation import expectation

        return expectation(self, theta, lambda x: np.ones(x.shape[0]))
