"""Direct spatial quadrature of the screen kernels: the fundamental solution,
single-layer application with singularity handling, and the radial transform
of the distance-truncated kernel. Serves as the independent oracle for the
symbol-side route.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import special as _sp

from .geometry import (GridFunction, gauss_panels, panel_breakpoints,
                       PANEL_PHASE_BUDGET)
from .spectral import QuadratureAccuracyWarning

__all__ = [
    "phi_kernel", "log_moments", "SingularPanelRule", "direct_single_layer",
    "direct_single_layer_adaptive", "truncated_kernel_transform",
]


def phi_kernel(x, y, k: float, dim: Optional[int] = None) -> complex:
    """Free-space outgoing kernel between two distinct points."""
    xv = np.asarray(x, dtype=float).ravel()
    yv = np.asarray(y, dtype=float).ravel()
    if xv.size != yv.size:
        raise ValueError("points must share a dimension")
    n = dim or xv.size
    r = float(np.linalg.norm(xv - yv))
    if r == 0.0:
        raise ValueError("kernel is singular at coincident points")
    return _kernel_radial(np.array([r]), k, n)[0]


def _kernel_radial(r: np.ndarray, k: float, dim: int) -> np.ndarray:
    if dim == 3:
        return np.exp(1j * k * r) / (4.0 * np.pi * r)
    if dim == 2:
        z = k * r
        return 0.25j * (_sp.j0(z) + 1j * _sp.y0(z))
    raise ValueError("ambient dimension must be 2 or 3")


def _log_remainder(r: np.ndarray, k: float) -> np.ndarray:
    # kernel = -(1/2pi) ln(r) J0(kr) + A(r); A analytic and even in r
    return _kernel_radial(r, k, 2) + np.log(r) * _sp.j0(k * r) / (2.0 * np.pi)


def log_moments(c_left: float, c_right: float) -> np.ndarray:
    """Exact integrals of u^m ln|u| over (-c_left, c_right) for m = 0, 1, 2."""
    if c_left < 0 or c_right < 0 or (c_left == 0 and c_right == 0):
        raise ValueError("moment interval must be nonempty")

    def one_sided(c):
        if c == 0:
            return np.zeros(3)
        m = np.arange(3)
        return c ** (m + 1) * (np.log(c) - 1.0 / (m + 1)) / (m + 1)

    signs = np.array([1.0, -1.0, 1.0])
    return signs * one_sided(c_left) + one_sided(c_right)


@dataclass(frozen=True)
class SingularPanelRule:
    """Panel layout for the singular and near-singular kernel quadratures."""

    points: int = 16
    grading_levels: int = 44
    duffy_points: int = 12
    budget_scale: float = 1.0
    near_cap: float = 1.0   # near zone size <= near_cap / k

    def refined(self) -> "SingularPanelRule":
        return replace(self, budget_scale=2.0 * self.budget_scale,
                       duffy_points=self.duffy_points + 6,
                       points=self.points + 4)

    @property
    def budget(self) -> float:
        return PANEL_PHASE_BUDGET / self.budget_scale


def _graded_toward(a: float, b: float, target: float, scale: float,
                   rate: float, budget: float, levels: int) -> np.ndarray:
    """Breakpoints of [a, b] shrinking geometrically into `target` (= a or b),
    stopping the grading at panel size ~ scale, with an oscillation budget."""
    length = b - a
    # keep the innermost panel representable against the absolute coordinates
    floor = max(scale, (abs(a) + abs(b)) * 1e-13, length * 2.0 ** -levels)
    rel = [length]
    d = length
    for _ in range(levels):
        d *= 0.5
        rel.append(d)
        if d <= floor:
            break
    rel.append(0.0)
    # a uniform skeleton so refinement always has panels to split
    n_uniform = max(4, int(np.ceil((length * rate + 8.0) / budget)))
    rel = np.unique(np.concatenate([rel, np.linspace(0.0, length,
                                                     n_uniform + 1)]))
    out = [rel[0]]
    for lo, hi in zip(rel[:-1], rel[1:]):
        n = max(1, int(np.ceil((hi - lo) * rate / budget)))
        out.extend(np.linspace(lo, hi, n + 1)[1:])
    rel = np.asarray(out)
    if target <= a + 1e-15 * max(1.0, abs(a)):
        return a + rel
    return b - rel[::-1]


def _smooth_interval(fn, k, a, b, xt, xn, rule) -> complex:
    y_star = min(max(xt, a), b)
    m = float(np.hypot(y_star - xt, xn))
    pieces = []
    if y_star > a:
        pieces.append(_graded_toward(a, y_star, y_star, m, k, rule.budget,
                                     rule.grading_levels))
    if y_star < b:
        pieces.append(_graded_toward(y_star, b, y_star, m, k, rule.budget,
                                     rule.grading_levels))
    total = 0.0 + 0.0j
    for bp in pieces:
        y, w = gauss_panels(bp, rule.points)
        r = np.hypot(y - xt, xn)
        total += np.sum(w * _kernel_radial(r, k, 2) * fn(y.reshape(-1, 1)))
    return complex(total)


def _singular_interval(fn, k, a, b, xt, rule) -> complex:
    c0 = min(0.25 * (b - a), rule.near_cap / k)
    cl = min(c0, xt - a)
    cr = min(c0, b - xt)
    total = 0.0 + 0.0j

    # far remainder of the interval, smooth kernel
    if a < xt - cl:
        total += _smooth_interval(fn, k, a, xt - cl, xt, 0.0, rule)
    if xt + cr < b:
        total += _smooth_interval(fn, k, xt + cr, b, xt, 0.0, rule)

    # quadratic interpolant of s(y) = J0(k|y-xt|) f(y) on the near zone
    theta = np.cos(np.pi * (2 * np.arange(3) + 1) / 6.0)
    u_fit = 0.5 * (cr - cl) + 0.5 * (cr + cl) * theta
    s_fit = _sp.j0(k * np.abs(u_fit)) * fn((xt + u_fit).reshape(-1, 1))
    alpha = np.polynomial.polynomial.polyfit(u_fit, s_fit, 2)
    total += -(1.0 / (2.0 * np.pi)) * np.sum(alpha * log_moments(cl, cr))

    # remainder (s - p) ln|u| and the analytic part A(|u|) f on graded panels
    for lo, hi, target in ((-cl, 0.0, 0.0), (0.0, cr, 0.0)):
        if hi - lo <= 0:
            continue
        bp = _graded_toward(lo, hi, target, 0.0, k, rule.budget,
                            rule.grading_levels)
        u, w = gauss_panels(bp, rule.points)
        fv = fn((xt + u).reshape(-1, 1))
        s = _sp.j0(k * np.abs(u)) * fv
        p = alpha[0] + u * (alpha[1] + u * alpha[2])
        total += -(1.0 / (2.0 * np.pi)) * np.sum(w * (s - p) * np.log(np.abs(u)))
        total += np.sum(w * _log_remainder(np.abs(u), k) * fv)
    return complex(total)


def _clip_interval(a, b, xt, xn, radius):
    if radius is None:
        return a, b
    half = radius * radius - xn * xn
    if half <= 0:
        return None
    half = float(np.sqrt(half))
    lo, hi = max(a, xt - half), min(b, xt + half)
    return (lo, hi) if lo < hi else None


def _duffy_triangle(fn, k, origin, corner_a, corner_b, points) -> complex:
    gx, gw = gauss_panels(np.array([0.0, 1.0]), points)
    u = gx[:, None]
    v = gx[None, :]
    w2 = gw[:, None] * gw[None, :]
    e1 = corner_a - origin
    e2 = corner_b - corner_a
    y1 = origin[0] + u * (e1[0] + v * e2[0])
    y2 = origin[1] + u * (e1[1] + v * e2[1])
    jac = u * abs(e1[0] * e2[1] - e1[1] * e2[0])
    r = np.hypot(y1 - origin[0], y2 - origin[1])
    pts = np.stack([y1.ravel(), y2.ravel()], axis=1)
    vals = fn(pts).reshape(r.shape)
    return complex(np.sum(w2 * _kernel_radial(r, k, 3) * vals * jac))


def _rect_smooth(fn, k, rect, xt, xn, rule) -> complex:
    (a1, b1), (a2, b2) = rect
    cx = min(max(xt[0], a1), b1)
    cy = min(max(xt[1], a2), b2)
    m = float(np.sqrt((cx - xt[0]) ** 2 + (cy - xt[1]) ** 2 + xn * xn))

    def axis_breaks(a, b, c):
        segs = []
        if c > a:
            segs.append(_graded_toward(a, c, c, m, k, rule.budget, 24))
        if c < b:
            segs.append(_graded_toward(c, b, c, m, k, rule.budget, 24))
        return np.unique(np.concatenate(segs))

    n1, w1 = gauss_panels(axis_breaks(a1, b1, cx), rule.points)
    n2, w2 = gauss_panels(axis_breaks(a2, b2, cy), rule.points)
    yy1 = np.repeat(n1, n2.size)
    yy2 = np.tile(n2, n1.size)
    ww = np.repeat(w1, n2.size) * np.tile(w2, n1.size)
    r = np.sqrt((yy1 - xt[0]) ** 2 + (yy2 - xt[1]) ** 2 + xn * xn)
    vals = fn(np.stack([yy1, yy2], axis=1))
    return complex(np.sum(ww * _kernel_radial(r, k, 3) * vals))


def direct_single_layer(phi: GridFunction, k: float, x,
                        rule: Optional[SingularPanelRule] = None,
                        truncation_radius: Optional[float] = None) -> complex:
    """Kernel-quadrature single layer of a smooth density at a point.

    `x` may be a surface point (on the screen plane) or a full ambient point.
    On-screen targets inside the support use the singularity-handling panels;
    everything else uses distance-graded smooth panels. `truncation_radius`
    restricts the integration to |y - x| below the radius (surface metric).
    """
    if phi.fn is None:
        raise ValueError("direct quadrature needs the density callable")
    rule = rule or SingularPanelRule()
    geo = phi.quad.geometry
    d = geo.dim_surface
    xv = np.asarray(x, dtype=float).ravel()
    if xv.size == d:
        tilde, xn = xv, 0.0
    elif xv.size == d + 1:
        tilde, xn = xv[:d], float(xv[d])
    else:
        raise ValueError("target point has wrong dimension")

    if d == 1:
        xt = float(tilde[0])
        total = 0.0 + 0.0j
        for a, b in geo.intervals:
            clipped = _clip_interval(a, b, xt, xn, truncation_radius)
            if clipped is None:
                continue
            ca, cb = clipped
            if xn != 0.0 or xt <= ca or xt >= cb:
                total += _smooth_interval(phi.fn, k, ca, cb, xt, xn, rule)
            else:
                total += _singular_interval(phi.fn, k, ca, cb, xt, rule)
        return total

    if truncation_radius is not None:
        raise NotImplementedError("kernel truncation is only used on the line")
    rect = geo.rectangle
    (a1, b1), (a2, b2) = rect
    inside = (a1 < tilde[0] < b1) and (a2 < tilde[1] < b2)
    if xn != 0.0 or not inside:
        return _rect_smooth(phi.fn, k, rect, tilde, xn, rule)
    corners = [np.array([a1, a2]), np.array([b1, a2]),
               np.array([b1, b2]), np.array([a1, b2])]
    total = 0.0 + 0.0j
    for i in range(4):
        total += _duffy_triangle(phi.fn, k, tilde, corners[i],
                                 corners[(i + 1) % 4], rule.duffy_points)
    return total


def direct_single_layer_adaptive(phi: GridFunction, k: float, x,
                                 tol: float = 1e-9, max_level: int = 6,
                                 truncation_radius: Optional[float] = None
                                 ) -> complex:
    """Self-refining reference value: doubles the panel resolution until the
    change drops below tol, warning if it never does."""
    rule = SingularPanelRule()
    prev = direct_single_layer(phi, k, x, rule, truncation_radius)
    for _ in range(max_level):
        rule = rule.refined()
        cur = direct_single_layer(phi, k, x, rule, truncation_radius)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    warnings.warn("singular panel refinement did not converge",
                  QuadratureAccuracyWarning, stacklevel=2)
    return prev


def truncated_kernel_transform(L: float, x_n: float, xi, k: float, dim: int,
                               points: int = 16, refine: int = 1) -> np.ndarray:
    """Radial transform of the kernel restricted to surface radius L.

    dim = 3: int_0^L F(r) J0(|xi| r) r dr with F the off-plane kernel profile;
    dim = 2: sqrt(2/pi) int_0^L F(r) cos(|xi| r) dr. Vectorized over xi.
    """
    if L <= 0:
        raise ValueError("truncation radius must be positive")
    xi_arr = np.asarray(xi, dtype=float)
    single = xi_arr.ndim == 0
    rho = np.abs(np.atleast_1d(xi_arr).astype(float)).ravel()
    if xi_arr.ndim == 2:
        rho = np.sqrt(np.sum(xi_arr * xi_arr, axis=1))

    rate = (k + float(np.max(rho, initial=0.0))) * refine
    xn = abs(x_n)
    if dim == 2 and xn == 0.0:
        bp = _graded_toward(0.0, L, 0.0, 0.0, rate, PANEL_PHASE_BUDGET, 46)
    else:
        scale = xn if xn > 0 else L
        bp = _graded_toward(0.0, L, 0.0, scale, rate, PANEL_PHASE_BUDGET, 24)
    r, w = gauss_panels(bp, points)

    dist = np.sqrt(r * r + x_n * x_n)
    if dim == 3:
        profile = np.exp(1j * k * dist) / (4.0 * np.pi * dist)
        out = _sp.j0(np.outer(rho, r)) @ (w * profile * r)
    elif dim == 2:
        profile = 0.25j * (_sp.j0(k * dist) + 1j * _sp.y0(k * dist))
        out = np.sqrt(2.0 / np.pi) * (np.cos(np.outer(rho, r)) @ (w * profile))
    else:
        raise ValueError("ambient dimension must be 2 or 3")
    return complex(out[0]) if single else out
