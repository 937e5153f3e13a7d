"""Symbol-side realization of the screen boundary operators and layer potentials.

The single-layer operator acts on the Fourier side as multiplication by
(i/2)/Z(xi), the hypersingular one by (i/2)Z(xi); the potentials carry the
extra off-plane factor exp(i|x_n| Z(xi)).
"""

from __future__ import annotations

import warnings
from enum import Enum
from typing import Optional, Union

import numpy as np

from .geometry import GridFunction, as_points
from .spectral import (QuadratureAccuracyWarning, SpectralQuadrature,
                       SpectrumFunction, nudft, z_symbol)

__all__ = [
    "SymbolKind", "symbol_values", "apply_symbol", "sesquilinear_a_D",
    "sesquilinear_a_N", "single_layer_potential", "double_layer_potential",
]

Operand = Union[GridFunction, SpectrumFunction, np.ndarray]


class SymbolKind(str, Enum):
    SINGLE_LAYER = "single_layer"
    HYPERSINGULAR = "hypersingular"


def symbol_values(kind: SymbolKind, xi, k: float) -> np.ndarray:
    z = z_symbol(xi, k)
    if kind == SymbolKind.SINGLE_LAYER:
        return 0.5j / z
    if kind == SymbolKind.HYPERSINGULAR:
        return 0.5j * z
    raise ValueError(f"unknown symbol kind {kind!r}")


def _node_spectrum(phi: Operand, quad: SpectralQuadrature) -> np.ndarray:
    if isinstance(phi, GridFunction):
        return nudft(phi.quad.nodes, phi.quad.weights, phi.values, quad.nodes)
    if isinstance(phi, SpectrumFunction):
        return phi(quad.nodes)
    arr = np.asarray(phi, dtype=complex)
    if arr.shape != (quad.size,):
        raise ValueError("spectrum array must match quadrature node count")
    return arr


def _split_field_point(x, dim: int):
    p = np.asarray(x, dtype=float).ravel()
    if p.size != dim + 1:
        raise ValueError(f"field point must have {dim + 1} coordinates")
    return p[:dim].reshape(1, dim), float(p[dim])


def apply_symbol(kind: SymbolKind, phi: Operand, k: float, targets,
                 quad: SpectralQuadrature,
                 check_refine: Optional[float] = None) -> np.ndarray:
    """Evaluate the operator on the screen plane at the given surface points."""
    pts = as_points(targets, quad.dim)
    fhat = _node_spectrum(phi, quad)
    sigma = symbol_values(kind, quad.nodes, k)
    scale = (2.0 * np.pi) ** (-0.5 * quad.dim)
    kernel = np.exp(1j * (pts @ quad.nodes.T))
    out = scale * (kernel @ (quad.weights * sigma * fhat))
    if check_refine is not None:
        fine = apply_symbol(kind, phi, k, targets, quad.refine(), None)
        err = np.max(np.abs(fine - out))
        tol = check_refine * max(np.max(np.abs(fine)), 1e-300)
        if err > tol:
            warnings.warn(
                f"symbol application changed by {err:.2e} under refinement",
                QuadratureAccuracyWarning, stacklevel=2)
    return out


def _form(weight_exponent: int, phi: Operand, psi: Operand, k: float,
          quad: SpectralQuadrature) -> complex:
    fhat = _node_spectrum(phi, quad)
    ghat = _node_spectrum(psi, quad)
    z = z_symbol(quad.nodes, k)
    zw = z if weight_exponent > 0 else 1.0 / z
    return complex(0.5j * np.sum(quad.weights * zw * fhat * np.conj(ghat)))


def sesquilinear_a_D(phi: Operand, psi: Operand, k: float,
                     quad: SpectralQuadrature,
                     check_refine: Optional[float] = None) -> complex:
    """Single-layer duality form (i/2) int phi_hat conj(psi_hat) / Z."""
    out = _form(-1, phi, psi, k, quad)
    if check_refine is not None:
        fine = _form(-1, phi, psi, k, quad.refine())
        if abs(fine - out) > check_refine * max(abs(fine), 1e-300):
            warnings.warn("single-layer form not converged",
                          QuadratureAccuracyWarning, stacklevel=2)
    return out


def sesquilinear_a_N(phi: Operand, psi: Operand, k: float,
                     quad: SpectralQuadrature,
                     check_refine: Optional[float] = None) -> complex:
    """Hypersingular duality form (i/2) int Z phi_hat conj(psi_hat)."""
    out = _form(+1, phi, psi, k, quad)
    if check_refine is not None:
        fine = _form(+1, phi, psi, k, quad.refine())
        if abs(fine - out) > check_refine * max(abs(fine), 1e-300):
            warnings.warn("hypersingular form not converged",
                          QuadratureAccuracyWarning, stacklevel=2)
    return out


def single_layer_potential(phi: Operand, k: float, x,
                           quad: SpectralQuadrature) -> complex:
    """Field of the single-layer potential at a point off the screen.

    For targets exactly on the plane the evanescent tail has no exponential
    decay; a warning flags the reduced accuracy there.
    """
    tilde, xn = _split_field_point(x, quad.dim)
    if xn == 0.0:
        warnings.warn("on-plane target: no evanescent decay, accuracy reduced",
                      QuadratureAccuracyWarning, stacklevel=2)
    fhat = _node_spectrum(phi, quad)
    z = z_symbol(quad.nodes, k)
    phase = np.exp(1j * ((tilde @ quad.nodes.T)[0] + abs(xn) * z))
    scale = 0.5j * (2.0 * np.pi) ** (-0.5 * quad.dim)
    return complex(scale * np.sum(quad.weights * phase * fhat / z))


def double_layer_potential(psi: Operand, k: float, x,
                           quad: SpectralQuadrature) -> complex:
    """Field of the double-layer potential; undefined on the plane itself."""
    tilde, xn = _split_field_point(x, quad.dim)
    if xn == 0.0:
        raise ValueError("double-layer potential needs x_n != 0")
    ghat = _node_spectrum(psi, quad)
    z = z_symbol(quad.nodes, k)
    phase = np.exp(1j * ((tilde @ quad.nodes.T)[0] + abs(xn) * z))
    scale = 0.5 * np.sign(xn) * (2.0 * np.pi) ** (-0.5 * quad.dim)
    return complex(scale * np.sum(quad.weights * phase * ghat))