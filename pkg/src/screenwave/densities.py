"""Closed-form smooth densities supported inside a screen, plus the test ensembles.

Every density built here is a short sum of rank-1 tensor products of 1D
closed-form factors; the spectral machinery exploits that to factor surface
transforms into per-axis 1D transforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .geometry import ScreenGeometry, as_points

AxisFactor = Callable[[np.ndarray], np.ndarray]
# one rank-1 term: (coefficient, one 1D factor per axis)
Rank1Term = tuple[complex, tuple[AxisFactor, ...]]


def unit_bump(t: np.ndarray) -> np.ndarray:
    """exp(-1/(1-t^2)) on |t| < 1, zero outside; C-infinity on the whole line."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    u = t[inside]
    out[inside] = np.exp(-1.0 / (1.0 - u * u))
    return out


@dataclass(frozen=True)
class Density:
    """A complex density on R^d given in closed form.

    `terms` holds the rank-1 tensor decomposition sum_t c_t prod_ax u_{t,ax};
    the generic callable is derived from it.
    """

    dim: int
    center: np.ndarray
    halfwidths: np.ndarray
    terms: tuple[Rank1Term, ...]
    label: str = ""

    def __call__(self, points) -> np.ndarray:
        p = as_points(points, self.dim)
        out = np.zeros(p.shape[0], dtype=complex)
        for coeff, factors in self.terms:
            part = np.full(p.shape[0], coeff, dtype=complex)
            for ax, u in enumerate(factors):
                part = part * u(p[:, ax])
            out += part
        return out

    # the sampling-style callable used by quadrature code
    @property
    def fn(self):
        return self.__call__

    @property
    def support_scale(self) -> float:
        return float(np.min(self.halfwidths))


def bump(center, halfwidths, dim: Optional[int] = None, label: str = "bump") -> Density:
    """Tensor-product smooth bump centered at `center` with the given halfwidths."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    h = np.atleast_1d(np.asarray(halfwidths, dtype=float))
    if h.size == 1 and c.size > 1:
        h = np.full(c.size, h[0])
    d = dim or c.size
    factors = tuple(
        (lambda x, cc=c[ax], hh=h[ax]: unit_bump((x - cc) / hh).astype(complex))
        for ax in range(d))
    return Density(dim=d, center=c, halfwidths=h,
                   terms=((1.0 + 0.0j, factors),), label=label)


def gaussian(center=0.0, sigma: float = 1.0, dim: int = 1, cutoff: float = 8.5) -> Density:
    """Gaussian reference density; effectively supported in +-cutoff*sigma."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.size != dim:
        c = np.full(dim, float(center))
    factors = tuple(
        (lambda x, cc=c[ax]: np.exp(-(x - cc) ** 2 / (2.0 * sigma * sigma))
         .astype(complex))
        for ax in range(dim))
    return Density(dim=dim, center=c, halfwidths=np.full(dim, cutoff * sigma),
                   terms=((1.0 + 0.0j, factors),), label="gaussian")


def modulate(density: Density, wavevector) -> Density:
    """Multiply a density by the plane-wave phase exp(i w . x)."""
    w = np.atleast_1d(np.asarray(wavevector, dtype=float))
    if w.size != density.dim:
        raise ValueError("wavevector dimension mismatch")

    def wrap(u: AxisFactor, wa: float) -> AxisFactor:
        return lambda x: u(x) * np.exp(1j * wa * x)

    terms = tuple(
        (coeff, tuple(wrap(u, w[ax]) for ax, u in enumerate(factors)))
        for coeff, factors in density.terms)
    return Density(dim=density.dim, center=density.center,
                   halfwidths=density.halfwidths, terms=terms,
                   label=f"{density.label}*e^(iwx)")


def combine(coeffs: Sequence[complex], parts: Sequence[Density], label: str = "combo") -> Density:
    if len(coeffs) != len(parts) or not parts:
        raise ValueError("need matching, nonempty coefficients and densities")
    d = parts[0].dim
    lo = np.min([p.center - p.halfwidths for p in parts], axis=0)
    hi = np.max([p.center + p.halfwidths for p in parts], axis=0)
    terms = []
    for c, part in zip(coeffs, parts):
        for coeff, factors in part.terms:
            terms.append((complex(c) * coeff, factors))
    return Density(dim=d, center=0.5 * (lo + hi), halfwidths=0.5 * (hi - lo),
                   terms=tuple(terms), label=label)


def base_bump(geometry: ScreenGeometry, fill: float = 0.9) -> Density:
    """The canonical k-independent bump filling `fill` of the screen support."""
    d = geometry.dim_surface
    if geometry.dim_ambient == 2:
        a, b = max(geometry.intervals, key=lambda iv: iv[1] - iv[0])
        return bump([0.5 * (a + b)], [0.5 * fill * (b - a)], dim=d, label="base")
    (a1, b1), (a2, b2) = geometry.rectangle
    return bump([0.5 * (a1 + b1), 0.5 * (a2 + b2)],
                [0.5 * fill * (b1 - a1), 0.5 * fill * (b2 - a2)],
                dim=d, label="base")


def _inplane_direction(angle_deg: float, dim: int) -> np.ndarray:
    # angle measured against the screen plane; only the in-plane component
    # survives in the surface phase
    c = np.cos(np.deg2rad(angle_deg))
    if dim == 1:
        return np.array([c])
    return c * np.array([1.0, 0.0])


@dataclass(frozen=True)
class DensityFamily:
    """Fixed bump material for a wavenumber sweep.

    The bump shapes are drawn once from the seed and reused at every k; only
    the modulation phases e^{i k d.x} change along the sweep.
    """

    geometry: ScreenGeometry
    seed: int = 42
    n_combinations: int = 10
    n_modulated: int = 10
    angles_deg: tuple[float, ...] = (0.0, 30.0, 60.0, 90.0)
    _bases: tuple[Density, ...] = field(init=False, repr=False)
    _mod_bases: tuple[Density, ...] = field(init=False, repr=False)
    _mod_dirs: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        geo = self.geometry
        d = geo.dim_surface
        if geo.dim_ambient == 2:
            a, b = max(geo.intervals, key=lambda iv: iv[1] - iv[0])
            lo, span = np.array([a]), np.array([b - a])
        else:
            (a1, b1), (a2, b2) = geo.rectangle
            lo, span = np.array([a1, a2]), np.array([b1 - a1, b2 - a2])

        def random_bump():
            h = span * rng.uniform(0.10, 0.22, size=d)
            c = lo + h + (span - 2 * h) * rng.uniform(size=d)
            return bump(c, h, dim=d)

        bases = []
        for i in range(self.n_combinations):
            parts = [random_bump() for _ in range(3)]
            coeffs = rng.uniform(0.2, 1.0, size=3)
            bases.append(combine(coeffs, parts, label=f"combo{i}"))
        mods = [random_bump() for _ in range(self.n_modulated)]
        angles = tuple(self.angles_deg[i % len(self.angles_deg)]
                       for i in range(self.n_modulated))
        object.__setattr__(self, "_bases", tuple(bases))
        object.__setattr__(self, "_mod_bases", tuple(mods))
        object.__setattr__(self, "_mod_dirs", angles)

    def members(self, k: float) -> list[Density]:
        """The full 20-density ensemble at wavenumber k."""
        d = self.geometry.dim_surface
        out = list(self._bases)
        for psi, ang in zip(self._mod_bases, self._mod_dirs):
            out.append(modulate(psi, k * _inplane_direction(ang, d)))
        return out

    def modulated_witness(self, k: float) -> Density:
        """Single glancing-modulated bump e^{i k x.d} psi with |d| = 1 in-plane."""
        d = self.geometry.dim_surface
        return modulate(base_bump(self.geometry), k * _inplane_direction(0.0, d))

    def fixed_witness(self) -> Density:
        return base_bump(self.geometry)
