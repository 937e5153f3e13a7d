"""Screen geometry, composite Gauss quadrature on it, and sampled densities."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import roots_legendre

# A 16-point Gauss-Legendre panel integrates exp(i*w*x) to ~1e-11 relative
# as long as panel_length * w stays below this budget.
PANEL_PHASE_BUDGET = 20.0
PANEL_POINTS = 16


@lru_cache(maxsize=32)
def _leggauss(points: int):
    x, w = roots_legendre(points)
    return np.asarray(x), np.asarray(w)


def gauss_panels(breakpoints, points: int = PANEL_POINTS):
    """Composite Gauss-Legendre rule on the panels between consecutive breakpoints."""
    x, w = _leggauss(points)
    b = np.asarray(breakpoints, dtype=float)
    if b.ndim != 1 or b.size < 2:
        raise ValueError("need at least two breakpoints")
    lo, hi = b[:-1], b[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def panel_breakpoints(a: float, b: float, max_freq: float, min_panels: int = 2,
                      budget: float = PANEL_PHASE_BUDGET) -> np.ndarray:
    """Uniform breakpoints of [a, b] sized so each panel respects the phase budget."""
    length = b - a
    if length <= 0:
        raise ValueError("empty panel range")
    n = max(min_panels, int(np.ceil(length * max(max_freq, 0.0) / budget)))
    return np.linspace(a, b, n + 1)


def graded_breakpoints(a: float, b: float, toward: float, max_freq: float,
                       levels: int = 40) -> np.ndarray:
    """Breakpoints of [a, b] refined dyadically toward an endpoint-adjacent point.

    `toward` must coincide with a or b; panels shrink geometrically into it so
    integrands with an integrable singularity there are resolved.
    """
    length = b - a
    pts = [0.0]
    d = length
    for _ in range(levels):
        d *= 0.5
        pts.append(length - d)
        if d * max(max_freq, 1.0) < 1e-14:
            break
    pts.append(length)
    rel = np.unique(np.asarray(pts))
    # enforce the oscillation budget on the coarse (outer) panels
    out = [rel[0]]
    for lo, hi in zip(rel[:-1], rel[1:]):
        seg = panel_breakpoints(lo, hi, max_freq, min_panels=1)
        out.extend(seg[1:])
    rel = np.asarray(out)
    if np.isclose(toward, a):
        return a + (rel[::-1][0] - rel[::-1])  # mirror so grading ends at a
    if np.isclose(toward, b):
        return a + rel
    raise ValueError("grading target must be one of the interval endpoints")


def as_points(x, dim: int) -> np.ndarray:
    """Coerce scalars / lists / arrays to an (M, dim) float array of points."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        if dim != 1:
            raise ValueError(f"scalar point given for dim {dim}")
        return a.reshape(1, 1)
    if a.ndim == 1:
        if dim == 1:
            return a.reshape(-1, 1)
        if a.size == dim:
            return a.reshape(1, dim)
        raise ValueError(f"cannot interpret shape {a.shape} as points in R^{dim}")
    if a.ndim == 2 and a.shape[1] == dim:
        return a
    raise ValueError(f"cannot interpret shape {a.shape} as points in R^{dim}")


@dataclass(frozen=True)
class ScreenGeometry:
    """A flat screen: open intervals on a line (ambient dim 2) or an open
    axis-aligned rectangle (ambient dim 3), sitting in the plane x_n = 0.
    """

    dim_ambient: int
    intervals: Optional[tuple[tuple[float, float], ...]] = None
    rectangle: Optional[tuple[tuple[float, float], tuple[float, float]]] = None

    def __post_init__(self):
        if self.dim_ambient not in (2, 3):
            raise ValueError("ambient dimension must be 2 or 3")
        if self.dim_ambient == 2:
            if not self.intervals:
                raise ValueError("dim 2 screen needs at least one interval")
            ivs = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
            for a, b in ivs:
                if not (np.isfinite(a) and np.isfinite(b) and a < b):
                    raise ValueError(f"bad interval ({a}, {b})")
            for (_, b0), (a1, _) in zip(ivs[:-1], ivs[1:]):
                if a1 < b0:
                    raise ValueError("intervals must be disjoint")
            object.__setattr__(self, "intervals", ivs)
        else:
            if self.rectangle is None:
                raise ValueError("dim 3 screen needs a rectangle")
            (a1, b1), (a2, b2) = self.rectangle
            if not (a1 < b1 and a2 < b2):
                raise ValueError("rectangle sides must be nonempty")
            object.__setattr__(
                self, "rectangle",
                ((float(a1), float(b1)), (float(a2), float(b2))))

    @classmethod
    def interval(cls, a: float, b: float) -> "ScreenGeometry":
        return cls(dim_ambient=2, intervals=((a, b),))

    @classmethod
    def union_of_intervals(cls, intervals) -> "ScreenGeometry":
        return cls(dim_ambient=2, intervals=tuple(tuple(iv) for iv in intervals))

    @classmethod
    def rect(cls, x_range, y_range) -> "ScreenGeometry":
        return cls(dim_ambient=3, rectangle=(tuple(x_range), tuple(y_range)))

    @property
    def dim_surface(self) -> int:
        return self.dim_ambient - 1

    @property
    def diameter(self) -> float:
        if self.dim_ambient == 2:
            return self.intervals[-1][1] - self.intervals[0][0]
        (a1, b1), (a2, b2) = self.rectangle
        return float(np.hypot(b1 - a1, b2 - a2))

    @property
    def measure(self) -> float:
        if self.dim_ambient == 2:
            return float(sum(b - a for a, b in self.intervals))
        (a1, b1), (a2, b2) = self.rectangle
        return float((b1 - a1) * (b2 - a2))

    @property
    def centroid(self) -> np.ndarray:
        if self.dim_ambient == 2:
            m = self.measure
            c = sum(0.5 * (a + b) * (b - a) for a, b in self.intervals) / m
            return np.array([c])
        (a1, b1), (a2, b2) = self.rectangle
        return np.array([0.5 * (a1 + b1), 0.5 * (a2 + b2)])

    @property
    def min_extent(self) -> float:
        """Smallest axis extent of a support component."""
        if self.dim_ambient == 2:
            return float(min(b - a for a, b in self.intervals))
        (a1, b1), (a2, b2) = self.rectangle
        return float(min(b1 - a1, b2 - a2))

    @property
    def max_radius(self) -> float:
        """max |x| over the closure of the support (for phase-rate budgets)."""
        if self.dim_ambient == 2:
            return float(max(abs(a) for iv in self.intervals for a in iv))
        (a1, b1), (a2, b2) = self.rectangle
        corners = [(a1, a2), (a1, b2), (b1, a2), (b1, b2)]
        return float(max(np.hypot(cx, cy) for cx, cy in corners))

    def contains(self, points) -> np.ndarray:
        p = as_points(points, self.dim_surface)
        if self.dim_ambient == 2:
            x = p[:, 0]
            inside = np.zeros(x.shape, dtype=bool)
            for a, b in self.intervals:
                inside |= (x > a) & (x < b)
            return inside
        (a1, b1), (a2, b2) = self.rectangle
        return (p[:, 0] > a1) & (p[:, 0] < b1) & (p[:, 1] > a2) & (p[:, 1] < b2)


@dataclass(frozen=True)
class SpatialQuadrature:
    """Composite Gauss rule over the screen support.

    `max_freq` records the largest phase rate (in radians per unit length) the
    rule was built to resolve; transforms evaluated beyond it lose accuracy.
    """

    nodes: np.ndarray      # (N, d)
    weights: np.ndarray    # (N,)
    geometry: ScreenGeometry
    max_freq: float

    def __post_init__(self):
        if self.nodes.ndim != 2 or self.nodes.shape[0] != self.weights.shape[0]:
            raise ValueError("inconsistent node/weight shapes")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")

    @classmethod
    def for_geometry(cls, geometry: ScreenGeometry, max_freq: float,
                     points: int = PANEL_POINTS) -> "SpatialQuadrature":
        if geometry.dim_ambient == 2:
            ns, ws = [], []
            for a, b in geometry.intervals:
                n, w = gauss_panels(panel_breakpoints(a, b, max_freq), points)
                ns.append(n)
                ws.append(w)
            nodes = np.concatenate(ns).reshape(-1, 1)
            weights = np.concatenate(ws)
        else:
            (a1, b1), (a2, b2) = geometry.rectangle
            n1, w1 = gauss_panels(panel_breakpoints(a1, b1, max_freq), points)
            n2, w2 = gauss_panels(panel_breakpoints(a2, b2, max_freq), points)
            nodes = np.stack(
                [np.repeat(n1, n2.size), np.tile(n2, n1.size)], axis=1)
            weights = np.repeat(w1, w2.size) * np.tile(w2, n1.size)
        return cls(nodes=nodes, weights=weights, geometry=geometry,
                   max_freq=float(max_freq))

    @property
    def size(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class GridFunction:
    """Complex samples of a density at the nodes of a spatial quadrature."""

    quad: SpatialQuadrature
    values: np.ndarray
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.quad.size,):
            raise ValueError("values must match quadrature node count")
        if not np.all(np.isfinite(v)):
            raise ValueError("density samples must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, fn, quad: SpatialQuadrature) -> "GridFunction":
        return cls(quad=quad, values=np.asarray(fn(quad.nodes), dtype=complex), fn=fn)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.quad.weights * np.abs(self.values) ** 2)))
