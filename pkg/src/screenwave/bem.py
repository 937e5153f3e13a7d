"""Piecewise-constant Galerkin solver for the sound-soft screen equation,
with field, far-field and spectral-norm post-processing of the solutions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special as _sp
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve, toeplitz

from .densities import Density, unit_bump
from .direct_ops import _kernel_radial, _log_remainder, log_moments
from .geometry import (PANEL_PHASE_BUDGET, ScreenGeometry, gauss_panels,
                       panel_breakpoints)
from .spectral import QuadratureAccuracyWarning, nudft

__all__ = [
    "ScreenMesh", "IncidentWave", "BemSystem", "assemble", "incident_trace",
    "solve_dirichlet", "scattered_field", "far_field", "pcw_spectrum",
    "Mollifier", "mollified_indicator",
]

COND_LIMIT = 1e12


@dataclass(frozen=True)
class ScreenMesh:
    """Uniform partition of the screen into flat piecewise-constant elements."""

    geometry: ScreenGeometry
    shape: tuple[int, ...]   # (N,) on the line, (N1, N2) on the rectangle

    def __post_init__(self):
        if self.geometry.dim_ambient == 2:
            if len(self.shape) != 1 or len(self.geometry.intervals) != 1:
                raise ValueError("line mesh needs one interval and one count")
        else:
            if len(self.shape) != 2:
                raise ValueError("rectangle mesh needs two counts")
        if any(n < 1 for n in self.shape):
            raise ValueError("element counts must be positive")

    @classmethod
    def uniform(cls, geometry: ScreenGeometry, n) -> "ScreenMesh":
        shape = (int(n),) if np.isscalar(n) else tuple(int(m) for m in n)
        return cls(geometry=geometry, shape=shape)

    @property
    def n_elements(self) -> int:
        return int(np.prod(self.shape))

    @property
    def h(self) -> float:
        """Largest element diameter."""
        if self.geometry.dim_ambient == 2:
            a, b = self.geometry.intervals[0]
            return (b - a) / self.shape[0]
        (a1, b1), (a2, b2) = self.geometry.rectangle
        return float(np.hypot((b1 - a1) / self.shape[0],
                              (b2 - a2) / self.shape[1]))

    @property
    def steps(self) -> np.ndarray:
        if self.geometry.dim_ambient == 2:
            a, b = self.geometry.intervals[0]
            return np.array([(b - a) / self.shape[0]])
        (a1, b1), (a2, b2) = self.geometry.rectangle
        return np.array([(b1 - a1) / self.shape[0], (b2 - a2) / self.shape[1]])

    def element_bounds(self):
        """Per-element (lo, hi) arrays, each of shape (n_elements, d)."""
        if self.geometry.dim_ambient == 2:
            a, _ = self.geometry.intervals[0]
            h = self.steps[0]
            idx = np.arange(self.shape[0])
            lo = (a + idx * h).reshape(-1, 1)
            return lo, lo + h
        (a1, _), (a2, _) = self.geometry.rectangle
        h1, h2 = self.steps
        i1, i2 = np.divmod(np.arange(self.n_elements), self.shape[1])
        lo = np.stack([a1 + i1 * h1, a2 + i2 * h2], axis=1)
        return lo, lo + self.steps[None, :]

    def centers(self) -> np.ndarray:
        lo, hi = self.element_bounds()
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class IncidentWave:
    """Unit-amplitude plane wave exp(i k x.d)."""

    direction: np.ndarray
    wavenumber: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float).ravel()
        if not np.isclose(np.linalg.norm(d), 1.0, atol=1e-12):
            raise ValueError("direction must be a unit vector")
        if self.wavenumber <= 0:
            raise ValueError("wavenumber must be positive")
        object.__setattr__(self, "direction", d)

    def field(self, points: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.exp(1j * self.wavenumber * (p @ self.direction))


@dataclass
class BemSystem:
    """Assembled Galerkin system for the sound-soft screen equation."""

    mesh: ScreenMesh
    k: float
    matrix: np.ndarray
    rhs: Optional[np.ndarray] = None
    solution: Optional[np.ndarray] = None
    cond_estimate: Optional[float] = None
    flags: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# assembly: pairwise element integrals reduced to difference-coordinate form
# ---------------------------------------------------------------------------

_J0_COEFF = [(-0.25) ** m / (_sp.factorial(m) ** 2) for m in range(5)]


def _tmoment(h: float, m: int) -> float:
    # int_0^h (h - u) u^m ln(u) du
    def prim(c, mm):
        return c ** (mm + 1) * (np.log(c) - 1.0 / (mm + 1)) / (mm + 1)

    return h * prim(h, m) - prim(h, m + 1)


def _row_self(h: float, k: float, points: int) -> complex:
    # log part through the kernel's small-argument expansion, rest by Gauss
    val = 0.0 + 0.0j
    for m, c in enumerate(_J0_COEFF):
        val += -(1.0 / (2.0 * np.pi)) * c * k ** (2 * m) * 2.0 * _tmoment(h, 2 * m)
    bp = panel_breakpoints(0.0, h, k, min_panels=4)
    u, w = gauss_panels(bp, points)
    val += 2.0 * np.sum(w * (h - u) * _log_remainder(u, k))
    return val


def _row_adjacent(h: float, k: float, points: int) -> complex:
    # overlap weight is u on [0, h]; u * ln(u) resolved by dyadic grading
    rel = h * 2.0 ** -np.arange(40, -1, -1.0)
    bp = np.concatenate([[0.0], rel])
    u, w = gauss_panels(bp, points)
    val = np.sum(w * u * _kernel_radial(u, k, 2))
    u, w = gauss_panels(panel_breakpoints(h, 2 * h, k, min_panels=2), points)
    val += np.sum(w * (2 * h - u) * _kernel_radial(u, k, 2))
    return complex(val)


def _assemble_line(mesh: ScreenMesh, k: float, points: int = 16) -> np.ndarray:
    n = mesh.shape[0]
    h = mesh.steps[0]
    row = np.empty(n, dtype=complex)
    row[0] = _row_self(h, k, points)
    if n > 1:
        row[1] = _row_adjacent(h, k, points)
    if n > 2:
        # shared relative rule for all separated pairs
        s_parts, w_parts = [], []
        for a, b in ((-h, 0.0), (0.0, h)):
            u, w = gauss_panels(panel_breakpoints(a, b, k, min_panels=2), points)
            s_parts.append(u)
            w_parts.append(w * (h - np.abs(u)))
        s = np.concatenate(s_parts)
        ws = np.concatenate(w_parts)
        q = np.arange(2, n, dtype=float)
        row[2:] = _kernel_radial(q[:, None] * h + s[None, :], k, 2) @ ws
    return toeplitz(row, row)


def _rect_offset_integral(p: int, q: int, h1: float, h2: float, k: float,
                          points: int = 12) -> complex:
    # int over the difference rectangle of W1(u1) W2(u2) exp(ik|u|)/(4pi|u|)
    if p == 0 and q == 0:
        total = 0.0 + 0.0j
        split = np.arctan2(h2, h1)
        for t0, t1, rmax in ((0.0, split, lambda t: h1 / np.cos(t)),
                             (split, 0.5 * np.pi, lambda t: h2 / np.sin(t))):
            tn, tw = gauss_panels(np.linspace(t0, t1, 5), points)
            for t, wt in zip(tn, tw):
                rn, rw = gauss_panels(
                    panel_breakpoints(0.0, rmax(t), k, min_panels=3), points)
                wgt = (h1 - rn * np.cos(t)) * (h2 - rn * np.sin(t))
                total += wt * np.sum(rw * wgt * np.exp(1j * k * rn)) / (4 * np.pi)
        return complex(4.0 * total)

    def axis_breaks(off, h):
        lo, hi = (off - 1) * h, (off + 1) * h
        if lo <= 0.0 < hi and off > 0:
            rel = hi * 2.0 ** -np.arange(30, -1, -1.0)
            return np.concatenate([[0.0], rel])
        pieces = [panel_breakpoints(lo, off * h, k, min_panels=2),
                  panel_breakpoints(off * h, hi, k, min_panels=2)]
        bp = np.unique(np.concatenate(pieces))
        if lo == -h:   # symmetric cell, possible singular interior point
            bp = np.unique(np.concatenate([bp, h * 2.0 ** -np.arange(30, 0, -1.0),
                                           -h * 2.0 ** -np.arange(30, 0, -1.0)]))
        return bp

    u1, w1 = gauss_panels(axis_breaks(p, h1), points)
    u2, w2 = gauss_panels(axis_breaks(q, h2), points)
    wgt1 = w1 * (h1 - np.abs(u1 - p * h1))
    wgt2 = w2 * (h2 - np.abs(u2 - q * h2))
    r = np.sqrt(u1[:, None] ** 2 + u2[None, :] ** 2)
    kern = np.exp(1j * k * r) / (4.0 * np.pi * r)
    return complex(wgt1 @ kern @ wgt2)


def _assemble_rect(mesh: ScreenMesh, k: float) -> np.ndarray:
    n1, n2 = mesh.shape
    h1, h2 = mesh.steps
    table = np.empty((n1, n2), dtype=complex)
    for p in range(n1):
        for q in range(n2):
            table[p, q] = _rect_offset_integral(p, q, h1, h2, k)
    i1, i2 = np.divmod(np.arange(mesh.n_elements), n2)
    dp = np.abs(i1[:, None] - i1[None, :])
    dq = np.abs(i2[:, None] - i2[None, :])
    return table[dp, dq]


def assemble(mesh: ScreenMesh, k: float) -> BemSystem:
    """Galerkin matrix of the single-layer form on piecewise constants."""
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    if mesh.geometry.dim_ambient == 2:
        matrix = _assemble_line(mesh, k)
    else:
        matrix = _assemble_rect(mesh, k)
    return BemSystem(mesh=mesh, k=k, matrix=matrix)


def _axis_wave_moment(lo, hi, kd: float) -> np.ndarray:
    """int_lo^hi exp(i kd t) dt, vectorized over element bounds."""
    if kd == 0.0:
        return (hi - lo).astype(complex)
    return (np.exp(1j * kd * hi) - np.exp(1j * kd * lo)) / (1j * kd)


def incident_trace(wave: IncidentWave, mesh: ScreenMesh) -> np.ndarray:
    """Right-hand side entries -int_elem exp(i k d.y) dy."""
    lo, hi = mesh.element_bounds()
    k = wave.wavenumber
    d = wave.direction
    moments = _axis_wave_moment(lo[:, 0], hi[:, 0], k * d[0])
    if mesh.geometry.dim_ambient == 3:
        moments = moments * _axis_wave_moment(lo[:, 1], hi[:, 1], k * d[1])
    return -moments


def solve_dirichlet(mesh: ScreenMesh, wave: IncidentWave) -> BemSystem:
    """Solve the screen equation for the jump in the normal derivative.

    The stored solution v satisfies  -A v = rhs  with rhs_i = -int_i u^inc,
    so v approximates the jump of du/dn across the screen.
    """
    sys = assemble(mesh, wave.wavenumber)
    sys.rhs = incident_trace(wave, mesh)
    lu, piv = lu_factor(sys.matrix)
    gecon = get_lapack_funcs("gecon", (sys.matrix,))
    anorm = np.linalg.norm(sys.matrix, 1)
    rcond, info = gecon(lu, anorm, norm="1")
    sys.cond_estimate = float(1.0 / rcond) if rcond > 0 else np.inf
    if info != 0 or sys.cond_estimate > COND_LIMIT:
        sys.flags.append(f"condition estimate {sys.cond_estimate:.3e}")
        warnings.warn("Galerkin matrix is numerically ill conditioned",
                      QuadratureAccuracyWarning, stacklevel=2)
    sys.solution = lu_solve((lu, piv), -sys.rhs)
    return sys


def _element_rule(mesh: ScreenMesh, points: int = 8):
    lo, hi = mesh.element_bounds()
    gx, gw = gauss_panels(np.array([0.0, 1.0]), points)
    if mesh.geometry.dim_ambient == 2:
        nodes = lo[:, :, None] + (hi - lo)[:, :, None] * gx[None, None, :]
        nodes = nodes.transpose(0, 2, 1)           # (E, P, 1)
        wts = (hi - lo)[:, 0, None] * gw[None, :]  # (E, P)
        return nodes, wts
    p2 = np.stack([np.repeat(gx, gx.size), np.tile(gx, gx.size)], axis=1)
    w2 = np.repeat(gw, gw.size) * np.tile(gw, gw.size)
    nodes = lo[:, None, :] + (hi - lo)[:, None, :] * p2[None, :, :]
    wts = np.prod(hi - lo, axis=1)[:, None] * w2[None, :]
    return nodes, wts


def scattered_field(sys: BemSystem, x) -> complex:
    """Field radiated by the solved density, u = -sum_j v_j int_j Phi(x, .)."""
    if sys.solution is None:
        raise ValueError("system is not solved")
    xv = np.asarray(x, dtype=float).ravel()
    d = sys.mesh.geometry.dim_surface
    if xv.size != d + 1:
        raise ValueError("field point must be an ambient point")
    tilde, xn = xv[:d], xv[d]
    centers = sys.mesh.centers()
    plane_dist = np.min(np.linalg.norm(centers - tilde[None, :], axis=1))
    if np.hypot(plane_dist, xn) < sys.mesh.h:
        warnings.warn("field point closer to the screen than one element",
                      QuadratureAccuracyWarning, stacklevel=2)
    nodes, wts = _element_rule(sys.mesh)
    diff = nodes - tilde[None, None, :]
    r = np.sqrt(np.sum(diff * diff, axis=2) + xn * xn)
    kern = _kernel_radial(r, sys.k, sys.mesh.geometry.dim_ambient)
    moments = np.sum(wts * kern, axis=1)
    return complex(-np.sum(sys.solution * moments))


def far_field(sys: BemSystem, direction) -> complex:
    """Angular far-field coefficient of the scattered wave.

    Normalization: u(x) ~ (e^{ikr}/r) F for ambient dimension 3 and
    u(x) ~ (e^{ikr}/sqrt(r)) F for dimension 2, as r = |x| grows.
    """
    if sys.solution is None:
        raise ValueError("system is not solved")
    xhat = np.asarray(direction, dtype=float).ravel()
    n = sys.mesh.geometry.dim_ambient
    if xhat.size != n or not np.isclose(np.linalg.norm(xhat), 1.0, atol=1e-12):
        raise ValueError("observation direction must be a unit ambient vector")
    k = sys.k
    lo, hi = sys.mesh.element_bounds()
    moments = _axis_wave_moment(lo[:, 0], hi[:, 0], -k * xhat[0])
    if n == 3:
        moments = moments * _axis_wave_moment(lo[:, 1], hi[:, 1], -k * xhat[1])
        scale = 1.0 / (4.0 * np.pi)
    else:
        scale = np.exp(0.25j * np.pi) / np.sqrt(8.0 * np.pi * k)
    return complex(-scale * np.sum(sys.solution * moments))


# ---------------------------------------------------------------------------
# spectra of the discrete densities
# ---------------------------------------------------------------------------

def pcw_spectrum(mesh: ScreenMesh, coeffs: np.ndarray, xi) -> np.ndarray:
    """Fourier transform of a piecewise-constant density, in closed form."""
    from .geometry import as_points
    pts = as_points(xi, mesh.geometry.dim_surface)
    lo, hi = mesh.element_bounds()
    coeffs = np.asarray(coeffs, dtype=complex)
    scale = (2.0 * np.pi) ** (-0.5 * pts.shape[1])
    out = np.zeros(pts.shape[0], dtype=complex)
    block = max(1, 4_000_000 // max(mesh.n_elements, 1))
    for start in range(0, pts.shape[0], block):
        sl = slice(start, start + block)
        factor = _segment_transform(lo[:, 0], hi[:, 0], pts[sl, 0])
        if mesh.geometry.dim_ambient == 3:
            factor = factor * _segment_transform(lo[:, 1], hi[:, 1], pts[sl, 1])
        out[sl] = scale * (factor @ coeffs)
    return out


def _segment_transform(lo, hi, xi):
    """int_lo^hi exp(-i xi t) dt for each (xi, segment) pair -> (M, E)."""
    xi = np.asarray(xi, dtype=float)[:, None]
    out = np.empty((xi.shape[0], lo.size), dtype=complex)
    small = np.abs(xi) < 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.exp(-1j * xi * lo[None, :]) - np.exp(-1j * xi * hi[None, :])) \
            / (1j * xi)
    if np.any(small):
        out[small[:, 0], :] = (hi - lo)[None, :]
    return out


class Mollifier:
    """Unit-mass smooth bump of a given halfwidth, with its CDF and transform."""

    def __init__(self, halfwidth: float):
        if halfwidth <= 0:
            raise ValueError("halfwidth must be positive")
        self.halfwidth = float(halfwidth)
        t = np.linspace(-1.0, 1.0, 16385)
        vals = unit_bump(t)
        mass = np.trapezoid(vals, t)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1])
                                               * np.diff(t))])
        self._t = t
        self._cdf = cum / mass
        gx, gw = gauss_panels(np.linspace(-1.0, 1.0, 49), 8)
        self._gx = gx
        self._gw = gw * unit_bump(gx) / mass

    def cdf(self, x) -> np.ndarray:
        """Mass of the bump below x (x in physical units)."""
        return np.interp(np.asarray(x, dtype=float) / self.halfwidth,
                         self._t, self._cdf, left=0.0, right=1.0)

    def hat(self, xi) -> np.ndarray:
        """Plain transform int eta(x) e^{-i xi x} dx; real, even, hat(0) = 1."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return np.cos(np.outer(xi * self.halfwidth, self._gx)) @ self._gw


def mollified_indicator(mesh: ScreenMesh, index: int,
                        width: Optional[float] = None) -> Density:
    """Element indicator convolved with a bump of width h/2 (halfwidth h/4)."""
    if mesh.geometry.dim_ambient != 2:
        raise NotImplementedError("mollified indicators are built on the line")
    lo, hi = mesh.element_bounds()
    a, b = float(lo[index, 0]), float(hi[index, 0])
    h = mesh.steps[0]
    w = (width if width is not None else 0.5 * h) / 2.0
    moll = Mollifier(w)

    def axis_fn(x):
        return (moll.cdf(x - a) - moll.cdf(x - b)).astype(complex)

    return Density(dim=1, center=np.array([0.5 * (a + b)]),
                   halfwidths=np.array([0.5 * (b - a) + w]),
                   terms=((1.0 + 0.0j, (axis_fn,)),),
                   label=f"moll_elem_{index}")


def mollified_pcw_spectrum(mesh: ScreenMesh, coeffs: np.ndarray, xi,
                           width: Optional[float] = None) -> np.ndarray:
    """Spectrum of the solution smoothed by the element-scale mollifier."""
    h = mesh.h if mesh.geometry.dim_ambient == 3 else mesh.steps[0]
    w = (width if width is not None else 0.5 * h) / 2.0
    moll = Mollifier(w)
    from .geometry import as_points
    pts = as_points(xi, mesh.geometry.dim_surface)
    raw = pcw_spectrum(mesh, coeffs, pts)
    g = moll.hat(pts[:, 0])
    if mesh.geometry.dim_ambient == 3:
        g = g * moll.hat(pts[:, 1])
    return raw * g
