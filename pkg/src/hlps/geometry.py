"""Planar geometry: points, circles, centroids, line fits and lens areas.

Coordinates are metres on a local east/north plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from . import kernels
from .errors import EmptyPointSet, InsufficientPoints

# Branch-selection slack on the centre distance, in metres.
LENS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate: ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Circle:
    center: Point2D
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")

    @property
    def area(self) -> float:
        return math.pi * self.radius * self.radius


@dataclass(frozen=True)
class LineFit:
    """Least-squares line through a point set.

    A ``sloped`` fit is ``y = slope * x + intercept``. When every x is
    equal the fit is ``vertical`` at ``x = x0`` and slope/intercept are None.
    """

    kind: Literal["sloped", "vertical"]
    centroid: Point2D
    slope: float | None = None
    intercept: float | None = None
    x0: float | None = None

    def residual(self, p: Point2D) -> float:
        """Signed offset of ``p`` from the line (vertical or horizontal, in metres)."""
        if self.kind == "vertical":
            return p.x - self.x0
        return p.y - (self.slope * p.x + self.intercept)


def distance(a: Point2D, b: Point2D) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def as_array(points: Iterable[Point2D] | np.ndarray) -> np.ndarray:
    """Return an (n, 2) float64 array for a point sequence or array."""
    if isinstance(points, np.ndarray):
        arr = np.ascontiguousarray(points, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"expected an (n, 2) array, got shape {arr.shape}")
        return arr
    arr = np.array([(p.x, p.y) for p in points], dtype=np.float64)
    return arr.reshape(-1, 2)


def centroid(points: Sequence[Point2D] | np.ndarray) -> Point2D:
    """Component-wise arithmetic mean of a non-empty point set."""
    arr = as_array(points)
    n = arr.shape[0]
    if n == 0:
        raise EmptyPointSet("centroid of an empty point set")
    sx, sy = kernels.coord_sum(arr)
    return Point2D(sx / n, sy / n)


def ols_fit(points: Sequence[Point2D] | np.ndarray) -> LineFit:
    """Ordinary least squares fit of y on x.

    The slope is computed from centred sums and the intercept is anchored
    at the centroid, so the returned line passes through the centroid up
    to rounding.
    """
    arr = as_array(points)
    if arr.shape[0] < 2:
        raise InsufficientPoints(f"need at least 2 points, got {arr.shape[0]}")
    c = centroid(arr)
    dx = arr[:, 0] - c.x
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        return LineFit(kind="vertical", centroid=c, x0=c.x)
    sxy = float(np.dot(dx, arr[:, 1] - c.y))
    slope = sxy / sxx
    return LineFit(kind="sloped", centroid=c, slope=slope, intercept=c.y - slope * c.x)


def lens_area(r1: float, r2: float, d: float) -> float:
    """Intersection area of two circles with radii ``r1``, ``r2`` whose
    centres are ``d`` apart."""
    if d >= r1 + r2 - LENS_TOLERANCE:
        return 0.0
    if d <= abs(r1 - r2) + LENS_TOLERANCE:
        r = min(r1, r2)
        return math.pi * r * r
    # acos arguments are clamped; rounding can push them just past +-1
    c1 = max(-1.0, min(1.0, (d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)))
    c2 = max(-1.0, min(1.0, (d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)))
    kite = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)
    return (
        r1 * r1 * math.acos(c1)
        + r2 * r2 * math.acos(c2)
        - 0.5 * math.sqrt(max(kite, 0.0))
    )


def circle_overlap_area(c1: Circle, c2: Circle) -> float:
    return lens_area(c1.radius, c2.radius, distance(c1.center, c2.center))


def overlap_fraction(interest: Circle, serving: Circle) -> float:
    """Share of the ``interest`` disc covered by ``serving``, in [0, 1]."""
    frac = circle_overlap_area(interest, serving) / interest.area
    return min(1.0, max(0.0, frac))


def monte_carlo_overlap_area(
    c1: Circle,
    c2: Circle,
    samples: int = 1_000_000,
    rng: np.random.Generator | None = None,
    chunk: int = 1 << 20,
) -> float:
    """Estimate the lens area by uniform sampling in the bounding square of
    the smaller circle.

    Independent of the closed form in :func:`lens_area`; used to cross-check it.
    """
    if samples <= 0:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng() if rng is None else rng
    box = c1 if c1.radius <= c2.radius else c2
    r = box.radius
    hits = 0
    left = samples
    while left > 0:
        m = min(chunk, left)
        xs = rng.uniform(box.center.x - r, box.center.x + r, m)
        ys = rng.uniform(box.center.y - r, box.center.y + r, m)
        hits += kernels.count_in_both(
            xs, ys,
            c1.center.x, c1.center.y, c1.radius,
            c2.center.x, c2.center.y, c2.radius,
        )
        left -= m
    return (2.0 * r) ** 2 * hits / samples
