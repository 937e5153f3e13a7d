"""Bessel and Hankel functions of orders 0 and 1 on the positive real axis.

Evaluation delegates to scipy's machine-accurate routines; this module pins
the domain contract (orders 0/1, strictly positive arguments) and the H = J + iY
composition used by the 2D fundamental solution.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

_J = {0: _sp.j0, 1: _sp.j1}
_Y = {0: _sp.y0, 1: _sp.y1}

EULER_GAMMA = 0.57721566490153286061

__all__ = ["bessel_j", "bessel_y", "hankel1", "EULER_GAMMA"]


def _validated(order: int, x):
    if order not in (0, 1):
        raise ValueError(f"order must be 0 or 1, got {order}")
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):
        raise ValueError("argument must be strictly positive")
    return arr


def bessel_j(order: int, x):
    """J_0 or J_1 for x > 0."""
    arr = _validated(order, x)
    out = _J[order](arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def bessel_y(order: int, x):
    """Y_0 or Y_1 for x > 0."""
    arr = _validated(order, x)
    out = _Y[order](arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def hankel1(order: int, x):
    """First-kind Hankel function H = J + iY for x > 0."""
    arr = _validated(order, x)
    out = _J[order](arr) + 1j * _Y[order](arr)
    return complex(out) if np.isscalar(x) or arr.ndim == 0 else out
