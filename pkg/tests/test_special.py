import math

import mpmath
import numpy as np
import pytest

from screenwave.special import bessel_j, bessel_y, hankel1


def series_j0(x: float) -> float:
    # independent power-series oracle, exact summation order
    terms = []
    term = 1.0
    m = 0
    while abs(term) > 1e-22:
        terms.append(term)
        m += 1
        term = (-1) ** m * (x / 2.0) ** (2 * m) / math.factorial(m) ** 2
    return math.fsum(terms)


def series_j1(x: float) -> float:
    terms = []
    m = 0
    while True:
        term = (-1) ** m * (x / 2.0) ** (2 * m + 1) \
            / (math.factorial(m) * math.factorial(m + 1))
        if abs(term) < 1e-22:
            break
        terms.append(term)
        m += 1
    return math.fsum(terms)


def test_series_oracle_values():
    assert bessel_j(0, 1.0) == pytest.approx(series_j0(1.0), abs=1e-14)
    assert bessel_j(1, 1.0) == pytest.approx(series_j1(1.0), abs=1e-14)
    assert bessel_j(0, 1.0) == pytest.approx(0.7651976866, abs=1e-9)
    assert bessel_j(1, 1.0) == pytest.approx(0.4400505857, abs=1e-9)


def test_hankel_combines_j_and_y():
    h = hankel1(0, 1.0)
    assert h.real == pytest.approx(0.7651976866, abs=1e-9)
    assert h.imag == pytest.approx(0.0882569642, abs=1e-9)
    assert hankel1(1, 2.5) == bessel_j(1, 2.5) + 1j * bessel_y(1, 2.5)


@pytest.mark.parametrize("order", [0, 1])
def test_high_precision_reference_across_range(order):
    mpmath.mp.dps = 30
    xs = np.geomspace(1e-3, 1e4, 25)
    for x in xs:
        ref_j = float(mpmath.besselj(order, mpmath.mpf(x)))
        ref_y = float(mpmath.bessely(order, mpmath.mpf(x)))
        scale_j = max(abs(ref_j), 1e-3)
        scale_y = max(abs(ref_y), 1e-3)
        assert abs(bessel_j(order, x) - ref_j) <= 1e-12 * scale_j
        assert abs(bessel_y(order, x) - ref_y) <= 1e-12 * scale_y


def test_small_argument_limits():
    assert bessel_j(0, 1e-8) == pytest.approx(1.0, abs=1e-12)
    val = 1e-6 * hankel1(1, 1e-6)
    assert abs(val - (-2j / np.pi)) < 1e-5


def test_hankel_magnitude_monotone_decreasing():
    xs = np.linspace(0.5, 30.0, 40)
    mags = np.abs(hankel1(0, xs))
    assert np.all(np.diff(mags) < 0)
    assert abs(hankel1(0, 2.0)) > abs(hankel1(0, 3.0))


def test_wronskian_identity():
    xs = np.geomspace(1e-3, 1e3, 50)
    lhs = bessel_j(1, xs) * bessel_y(0, xs) - bessel_j(0, xs) * bessel_y(1, xs)
    rhs = 2.0 / (np.pi * xs)
    assert np.max(np.abs(lhs - rhs) / rhs) < 1e-10


def test_derivative_relations_by_finite_differences():
    xs = np.linspace(0.5, 20.0, 12)
    h = 1e-6
    dj0 = (bessel_j(0, xs + h) - bessel_j(0, xs - h)) / (2 * h)
    assert np.max(np.abs(dj0 + bessel_j(1, xs))) < 1e-6
    dh0 = (hankel1(0, xs + h) - hankel1(0, xs - h)) / (2 * h)
    target = -hankel1(1, xs)
    assert np.max(np.abs(dh0.real - target.real)) < 1e-6
    assert np.max(np.abs(dh0.imag - target.imag)) < 1e-6
    # d/dz (z B1) = z B0
    dzb1 = ((xs + h) * bessel_j(1, xs + h) - (xs - h) * bessel_j(1, xs - h)) \
        / (2 * h)
    assert np.max(np.abs(dzb1 - xs * bessel_j(0, xs))) < 1e-6


def test_amplitude_bounds():
    xs = np.geomspace(1e-2, 1e3, 200)
    assert np.all(np.abs(bessel_j(0, xs)) <= 1.0 + 1e-15)
    assert np.all(np.abs(bessel_j(1, xs)) <= 1.0 + 1e-15)
    tail = xs[xs > 1.0]
    assert np.all(np.sqrt(tail) * np.abs(hankel1(0, tail)) <= 1.0)


def test_domain_validation():
    with pytest.raises(ValueError):
        bessel_j(0, 0.0)
    with pytest.raises(ValueError):
        bessel_j(0, -1.0)
    with pytest.raises(ValueError):
        bessel_j(2, 1.0)
    with pytest.raises(ValueError):
        hankel1(1, np.array([1.0, -2.0]))
