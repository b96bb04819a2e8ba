import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class Interval:
    """Open interval (lo, hi) on the extended real line."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi) or not self.lo < self.hi:
            raise ValueError(f"interval needs lo < hi, got ({self.lo}, {self.hi})")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def scale(self, x: float) -> float:
        """Length unit for domain-relative margins around ``x``."""
        if self.is_finite:
            return self.width
        return max(1.0, abs(x))

    def contains(self, x: float, margin: float = 0.0) -> bool:
        if not math.isfinite(x):
            return False
        pad = margin * self.scale(x)
        return self.lo + pad < x < self.hi - pad

    def __str__(self) -> str:
        return f"({self.lo:g},{self.hi:g})"


@dataclass(frozen=True)
class HyperRectangle:
    """Finite, non-degenerate box used as an integration region."""

    axes: Tuple[Interval, ...]

    def __post_init__(self) -> None:
        if len(self.axes) < 1:
            raise ValueError("a box needs at least one axis")
        for k, axis in enumerate(self.axes):
            if not axis.is_finite:
                raise ValueError(f"box axis {k} is unbounded: {axis}")

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float]) -> "HyperRectangle":
        return cls(tuple(Interval(float(a), float(b)) for a, b in zip(lo, hi)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def lower(self) -> np.ndarray:
        return np.array([a.lo for a in self.axes])

    @property
    def upper(self) -> np.ndarray:
        return np.array([a.hi for a in self.axes])

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def split(self, axis: int) -> Tuple["HyperRectangle", "HyperRectangle"]:
        """Bisect along ``axis``."""
        target = self.axes[axis]
        mid = 0.5 * (target.lo + target.hi)
        left = list(self.axes)
        right = list(self.axes)
        left[axis] = Interval(target.lo, mid)
        right[axis] = Interval(mid, target.hi)
        return HyperRectangle(tuple(left)), HyperRectangle(tuple(right))

    def project(self, axes: Sequence[int]) -> "HyperRectangle":
        return HyperRectangle(tuple(self.axes[k] for k in axes))

    def __str__(self) -> str:
        return "x".join(f"[{a.lo:.12g},{a.hi:.12g}]" for a in self.axes)
