"""Fourier transforms on the screen plane, the plane-wave factorization symbol
Z, wavenumber-weighted Sobolev norms, and the frequency quadrature that
resolves the square-root branch ring |xi| = k.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .geometry import (PANEL_PHASE_BUDGET, GridFunction, ScreenGeometry,
                       SpatialQuadrature, as_points, gauss_panels,
                       panel_breakpoints)
from .densities import unit_bump

__all__ = [
    "z_symbol", "nudft", "fourier_transform", "SpectrumFunction",
    "SobolevParams", "SpectralQuadrature", "build_spectral_quadrature",
    "sobolev_norm", "SpectralWorkspace", "QuadratureAccuracyWarning",
]

_NUDFT_BLOCK = 6_000_000  # max complex exponentials per chunk


class QuadratureAccuracyWarning(UserWarning):
    """A quadrature could not certify the requested accuracy."""


def z_symbol(xi, k: float):
    """sqrt(k^2 - |xi|^2) on the propagating disk, i*sqrt(|xi|^2 - k^2) outside.

    A scalar or 1-dim array is read as frequencies on the line; an (M, d)
    array as points in R^d.
    """
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    pts = np.asarray(xi, dtype=float)
    scalar = pts.ndim == 0
    if pts.ndim <= 1:
        rho2 = np.atleast_1d(pts) ** 2
    else:
        rho2 = np.sum(pts * pts, axis=1)
    gap = k * k - rho2
    out = np.where(gap >= 0,
                   np.sqrt(np.maximum(gap, 0.0)) + 0j,
                   1j * np.sqrt(np.maximum(-gap, 0.0)))
    if scalar:
        return complex(out[0])
    return out


def nudft(nodes: np.ndarray, weights: np.ndarray, values: np.ndarray,
          xi: np.ndarray) -> np.ndarray:
    """Direct weighted transform (2pi)^(-d/2) sum_j w_j v_j exp(-i xi.x_j).

    `values` may be (N,) or (N, B) for a batch; output is (M,) or (M, B).
    """
    d = nodes.shape[1]
    xi = as_points(xi, d)
    values = np.asarray(values)
    wv = weights[:, None] * values if values.ndim == 2 else weights * values
    scale = (2.0 * np.pi) ** (-0.5 * d)
    m, n = xi.shape[0], nodes.shape[0]
    chunk = max(1, _NUDFT_BLOCK // max(n, 1))
    outs = []
    for start in range(0, m, chunk):
        block = xi[start:start + chunk]
        kernel = np.exp(-1j * (block @ nodes.T))
        outs.append(kernel @ wv)
    return scale * np.concatenate(outs, axis=0)


def fourier_transform(f: GridFunction, xi):
    """Quadrature Fourier transform of a sampled density at frequency point(s)."""
    single = np.asarray(xi, dtype=float).ndim <= 1
    out = nudft(f.quad.nodes, f.quad.weights, f.values,
                as_points(xi, f.quad.nodes.shape[1]))
    return complex(out[0]) if (single and out.shape[0] == 1) else out


class SpectrumFunction:
    """A density's Fourier transform, evaluable at arbitrary frequencies."""

    def __init__(self, evaluator: Callable[[np.ndarray], np.ndarray], dim: int,
                 decay_hint: Optional[str] = None):
        self.evaluator = evaluator
        self.dim = dim
        self.decay_hint = decay_hint

    def __call__(self, xi) -> np.ndarray:
        return np.asarray(self.evaluator(as_points(xi, self.dim)), dtype=complex)

    @classmethod
    def from_grid(cls, f: GridFunction, decay_hint: Optional[str] = None
                  ) -> "SpectrumFunction":
        return cls(lambda xi: nudft(f.quad.nodes, f.quad.weights, f.values, xi),
                   dim=f.quad.nodes.shape[1], decay_hint=decay_hint)

    @classmethod
    def from_callable(cls, fn, dim: int, decay_hint: Optional[str] = None
                      ) -> "SpectrumFunction":
        return cls(lambda xi: np.asarray(fn(xi), dtype=complex), dim=dim,
                   decay_hint=decay_hint)


@dataclass(frozen=True)
class SobolevParams:
    """Order s and wavenumber k of the weight (k^2 + |xi|^2)^s."""

    order: float
    wavenumber: float

    def __post_init__(self):
        if not np.isfinite(self.order):
            raise ValueError("order must be finite")
        if self.wavenumber <= 0:
            raise ValueError("wavenumber must be positive")


# ---------------------------------------------------------------------------
# frequency quadrature
# ---------------------------------------------------------------------------

def _budget_breakpoints(a, b, rate, budget, min_panels=2):
    n = max(min_panels, int(np.ceil((b - a) * max(rate, 0.0) / budget)))
    return np.linspace(a, b, n + 1)


def _ring_side_breakpoints(t_end, feature, rate, budget):
    # geometric halving toward t = 0 until panels resolve the spectral feature
    pts = [t_end]
    t = t_end
    for _ in range(14):
        if t <= feature:
            break
        t *= 0.5
        pts.append(t)
    pts.append(0.0)
    pts = np.asarray(sorted(set(pts)))
    out = [pts[0]]
    for lo, hi in zip(pts[:-1], pts[1:]):
        seg = _budget_breakpoints(lo, hi, rate, budget, min_panels=1)
        out.extend(seg[1:])
    return np.asarray(out)


@dataclass(frozen=True)
class SpectralQuadrature:
    """Graded frequency rule on |xi| <= cutoff avoiding the ring |xi| = k.

    Near the ring the nodes follow the substitution t = sign(|xi|-k) *
    sqrt(||xi|^2-k^2|), which removes inverse-square-root singularities of the
    integrand exactly and keeps every node strictly off the ring.
    """

    dim: int
    nodes: np.ndarray     # (M, d)
    weights: np.ndarray   # (M,)
    k: float
    cutoff: float
    delta: float
    rate: float
    xn_max: float
    points: int
    refine_level: int
    accuracy: float

    @property
    def size(self) -> int:
        return self.weights.size

    def radii(self) -> np.ndarray:
        return np.sqrt(np.sum(self.nodes ** 2, axis=1))

    def propagating(self) -> np.ndarray:
        return self.radii() < self.k

    def refine(self, factor: int = 2) -> "SpectralQuadrature":
        """Same layout with `factor` times finer panels (for convergence checks)."""
        return _build(self.dim, self.k, self.cutoff, self.delta, self.rate,
                      self.xn_max, self.points, self.refine_level * factor,
                      self.accuracy)


def _phase_budget(accuracy: float) -> float:
    # 16-point panels: phase budget 30 keeps panels at ~3e-11 relative error,
    # 42 at ~1e-5; coarse budgets are enough for probe-grade accuracies
    return 30.0 if accuracy <= 1e-6 else 42.0


def _edge_graded_breakpoints(a, b, edge, start, rate, budget, min_panels=3):
    """Breakpoints of [a, b] doubling away from `edge` (one endpoint) starting
    at size `start`, then budget-uniform; resolves branch-point proximity."""
    length = b - a
    offs = [0.0]
    d = min(start, length)
    while offs[-1] + d < length and d * max(rate, 0.0) < budget:
        offs.append(offs[-1] + d)
        d *= 2.0
    rest_lo = offs[-1]
    rest = _budget_breakpoints(rest_lo, length, rate, budget,
                               min_panels=max(1, min_panels - len(offs) + 1))
    rel = np.unique(np.concatenate([offs, rest]))
    if edge <= a + 1e-15 * max(1.0, abs(a)):
        return a + rel
    return b - rel[::-1]


def _build(dim, k, cutoff, delta, rate, xn_max, points, refine, accuracy):
    budget = _phase_budget(accuracy) / refine
    segs_xi, segs_w = [], []

    r1 = rate + 1.2 * xn_max + 1.0 / k
    bp = _edge_graded_breakpoints(0.0, k - delta, k - delta, delta, r1, budget)
    n, w = gauss_panels(bp, points)
    segs_xi.append(n)
    segs_w.append(w)

    feature = np.sqrt(2.0 * np.pi * k / max(rate, 1e-3 / k))
    for t_end, sign in ((np.sqrt(delta * (2 * k - delta)), -1.0),
                        (np.sqrt(delta * (2 * k + delta)), +1.0)):
        rate_t = rate * t_end / k + xn_max
        bp = _ring_side_breakpoints(t_end, feature, rate_t, budget)
        t, tw = gauss_panels(bp, points)
        xi = np.sqrt(k * k + sign * t * t)
        segs_xi.append(xi)
        segs_w.append(tw * t / xi)

    r3 = rate + xn_max + 1.0 / k
    bp = _edge_graded_breakpoints(k + delta, cutoff, k + delta, delta, r3,
                                  budget)
    n, w = gauss_panels(bp, points)
    segs_xi.append(n)
    segs_w.append(w)

    radial = np.concatenate(segs_xi)
    radial_w = np.concatenate(segs_w)
    order = np.argsort(radial)
    radial, radial_w = radial[order], radial_w[order]

    if dim == 1:
        nodes = np.concatenate([-radial[::-1], radial]).reshape(-1, 1)
        weights = np.concatenate([radial_w[::-1], radial_w])
    else:
        xs, ys, ws = [], [], []
        for r, wr in zip(radial, radial_w):
            n_theta = int(2 * np.ceil((1.1 * r * rate + 30.0 * refine) / 2))
            theta = (np.arange(n_theta) + 0.5) * (2 * np.pi / n_theta)
            xs.append(r * np.cos(theta))
            ys.append(r * np.sin(theta))
            ws.append(np.full(n_theta, wr * r * 2 * np.pi / n_theta))
        nodes = np.stack([np.concatenate(xs), np.concatenate(ys)], axis=1)
        weights = np.concatenate(ws)

    return SpectralQuadrature(dim=dim, nodes=nodes, weights=weights, k=k,
                              cutoff=cutoff, delta=delta, rate=rate,
                              xn_max=xn_max, points=points, refine_level=refine,
                              accuracy=accuracy)


def _axis_bump_spectrum_sq(k, halfwidth, cutoff, s_max, points=12):
    """(k^2+xi^2)^s |bump_hat|^2 sampled on [0, cutoff]; returns (xi, contrib)."""
    xn, xw = gauss_panels(panel_breakpoints(-halfwidth, halfwidth,
                                            cutoff, min_panels=8), 16)
    vals = unit_bump(xn / halfwidth)
    xi, w = gauss_panels(
        _budget_breakpoints(0.0, cutoff, halfwidth, PANEL_PHASE_BUDGET,
                            min_panels=32), points)
    hat = np.cos(np.outer(xi, xn)) @ (xw * vals)  # real part suffices: even bump
    contrib = w * (k * k + xi * xi) ** s_max * hat ** 2
    return xi, contrib


def _choose_cutoff(k, accuracy, s_max, min_scale):
    cutoff = max(10.0 * k, 20.0 / min_scale)
    for _ in range(24):
        xi, contrib = _axis_bump_spectrum_sq(k, min_scale, cutoff, s_max)
        total = np.sum(contrib)
        tail = np.sum(contrib[xi >= 0.5 * cutoff])
        if tail <= accuracy * total:
            return cutoff
        cutoff *= 2.0
    raise RuntimeError("frequency cutoff selection did not terminate")


def build_spectral_quadrature(k: float, geometry: ScreenGeometry,
                              accuracy: float = 1e-8, *,
                              s_max: float = 1.0,
                              min_scale: Optional[float] = None,
                              cutoff: Optional[float] = None,
                              target_radius: Optional[float] = None,
                              xn_max: float = 0.0,
                              delta: Optional[float] = None,
                              points: int = 16) -> SpectralQuadrature:
    """Frequency rule adapted to a screen and wavenumber.

    Parameters
    ----------
    accuracy : tail tolerance used when doubling the cutoff.
    s_max : largest Sobolev order whose norm tail must be resolved.
    min_scale : finest spatial scale of the densities (default: a tenth of the
        smallest support extent); controls how far the cutoff must reach.
    target_radius : largest |x| at which symbol applications will be evaluated
        (defaults to the support radius).
    xn_max : largest off-plane distance used in layer-potential phases.
    """
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    if accuracy <= 0:
        raise ValueError("accuracy must be positive")
    d = geometry.dim_surface
    rho = geometry.max_radius
    tr = rho if target_radius is None else max(target_radius, rho)
    rate = rho + tr
    if min_scale is None:
        min_scale = 0.1 * geometry.min_extent
    if cutoff is None:
        cutoff = _choose_cutoff(k, accuracy, s_max, min_scale)
    cutoff = max(cutoff, 2.0 * k)
    if delta is None:
        delta = k / 4.0
    delta = min(delta, k / 3.0)
    return _build(d, k, cutoff, delta, rate, xn_max, points, 1, accuracy)


def sobolev_norm(fhat: Union[SpectrumFunction, np.ndarray],
                 params: SobolevParams, quad: SpectralQuadrature) -> float:
    """Weighted spectral norm ( sum w (k^2+|xi|^2)^s |fhat|^2 )^(1/2).

    `fhat` may be a SpectrumFunction (evaluated at the quadrature nodes) or a
    precomputed array of node values.
    """
    vals = fhat(quad.nodes) if callable(fhat) else np.asarray(fhat)
    rho2 = np.sum(quad.nodes ** 2, axis=1)
    weight = (params.wavenumber ** 2 + rho2) ** params.order
    return float(np.sqrt(np.sum(quad.weights * weight * np.abs(vals) ** 2)))


def _axis_rules(geometry: ScreenGeometry, max_freq: float, budget: float):
    """One composite 1D Gauss rule per surface axis."""
    if geometry.dim_ambient == 2:
        ns, ws = [], []
        for a, b in geometry.intervals:
            n, w = gauss_panels(panel_breakpoints(a, b, max_freq, budget=budget))
            ns.append(n)
            ws.append(w)
        return [(np.concatenate(ns), np.concatenate(ws))]
    out = []
    for a, b in geometry.rectangle:
        n, w = gauss_panels(panel_breakpoints(a, b, max_freq, budget=budget))
        out.append((n, w))
    return out


class SpectralWorkspace:
    """Shared discretization for one (geometry, k): one frequency rule, the
    per-axis spatial rules resolving it, and batched spectra of many densities.

    Densities composed of rank-1 tensor terms are transformed axis by axis,
    which keeps the cost linear in the node counts per axis.
    """

    def __init__(self, geometry: ScreenGeometry, k: float,
                 accuracy: float = 1e-8, *, s_max: float = 1.0,
                 extra_freq: float = 0.0, xn_max: float = 0.0,
                 target_radius: Optional[float] = None,
                 min_scale: Optional[float] = None,
                 cutoff: Optional[float] = None):
        self.geometry = geometry
        self.k = float(k)
        self.quad = build_spectral_quadrature(
            k, geometry, accuracy, s_max=s_max, min_scale=min_scale,
            cutoff=cutoff, target_radius=target_radius, xn_max=xn_max)
        self.max_freq = self.quad.cutoff + extra_freq
        self._axes = _axis_rules(geometry, self.max_freq,
                                 _phase_budget(accuracy))
        self._xquad = None
        self._rho2 = np.sum(self.quad.nodes ** 2, axis=1)

    @property
    def xquad(self) -> SpatialQuadrature:
        if self._xquad is None:
            self._xquad = SpatialQuadrature.for_geometry(self.geometry,
                                                         self.max_freq)
        return self._xquad

    def spectra(self, densities) -> np.ndarray:
        """(M, B) spectra of a list of tensor-term densities at the nodes."""
        terms = []
        owner_cols = []
        for i, dens in enumerate(densities):
            for coeff, factors in dens.terms:
                terms.append((complex(coeff), factors))
                owner_cols.append(i)
        n_terms, n_dens = len(terms), len(densities)
        d = self.quad.dim
        scale = (2.0 * np.pi) ** -0.5
        axis_mats = []
        for ax in range(d):
            nodes, w = self._axes[ax]
            mat = np.empty((nodes.size, n_terms), dtype=complex)
            for t, (_, factors) in enumerate(terms):
                mat[:, t] = factors[ax](nodes)
            mat *= (scale * w)[:, None]
            axis_mats.append((nodes, mat))
        gather = np.zeros((n_terms, n_dens), dtype=complex)
        for t, (coeff, _) in enumerate(terms):
            gather[t, owner_cols[t]] = coeff
        out = np.empty((self.quad.size, n_dens), dtype=complex)
        max_axis = max(nodes.size for nodes, _ in axis_mats)
        chunk = max(64, _NUDFT_BLOCK // max(max_axis, 1))
        for start in range(0, self.quad.size, chunk):
            sl = slice(start, min(start + chunk, self.quad.size))
            prod = None
            for ax, (nodes, mat) in enumerate(axis_mats):
                kernel = np.exp(-1j * np.outer(self.quad.nodes[sl, ax], nodes))
                part = kernel @ mat
                prod = part if prod is None else prod * part
            out[sl] = prod @ gather
        return out

    def spectrum(self, density) -> np.ndarray:
        return self.spectra([density])[:, 0]

    def norm_sq(self, spectrum_values: np.ndarray, s: float,
                k: Optional[float] = None):
        kk = self.k if k is None else k
        weight = self.quad.weights * (kk * kk + self._rho2) ** s
        sq = np.abs(spectrum_values) ** 2
        if sq.ndim == 1:
            return float(np.sum(weight * sq))
        return weight @ sq

    def sobolev_norm(self, spectrum_values: np.ndarray, s: float,
                     k: Optional[float] = None):
        return np.sqrt(self.norm_sq(spectrum_values, s, k))
