import numpy as np
import pytest

from screenwave.densities import DensityFamily, base_bump, bump, gaussian
from screenwave.geometry import GridFunction, ScreenGeometry, SpatialQuadrature
from screenwave.spectral import (SobolevParams, SpectralWorkspace,
                                 SpectrumFunction, build_spectral_quadrature,
                                 fourier_transform, nudft, sobolev_norm,
                                 z_symbol)

LINE = ScreenGeometry.interval(-0.5, 0.5)
RECT = ScreenGeometry.rect((-0.5, 0.5), (-0.5, 0.5))


# ---------------------------------------------------------------------------
# plane-wave factorization symbol
# ---------------------------------------------------------------------------

def test_z_symbol_branch_values():
    assert z_symbol(0.0, 2.0) == pytest.approx(2.0)
    assert z_symbol(1.0, 1.0) == 0.0
    assert z_symbol(np.sqrt(2.0), 1.0) == pytest.approx(1.0j)


def test_z_symbol_quadrant_invariant():
    rng = np.random.default_rng(1)
    xi = rng.uniform(-10, 10, size=(200, 2))
    z = z_symbol(xi, 3.0)
    assert np.all(z.real >= 0)
    assert np.all(z.imag >= 0)
    on_ring = np.isclose(np.linalg.norm(xi, axis=1), 3.0)
    both = (z.real > 0) & (z.imag > 0)
    assert not np.any(both[~on_ring])


def test_z_symbol_requires_positive_wavenumber():
    with pytest.raises(ValueError):
        z_symbol(1.0, 0.0)


# ---------------------------------------------------------------------------
# quadrature transforms
# ---------------------------------------------------------------------------

def test_transform_of_zero_density():
    quad = SpatialQuadrature.for_geometry(LINE, 20.0)
    f = GridFunction(quad=quad, values=np.zeros(quad.size))
    assert fourier_transform(f, 3.3) == 0.0


def test_transform_of_unit_indicator_at_zero_frequency():
    geo = ScreenGeometry.interval(0.0, 1.0)
    quad = SpatialQuadrature.for_geometry(geo, 20.0)
    f = GridFunction(quad=quad, values=np.ones(quad.size))
    assert fourier_transform(f, 0.0) == pytest.approx((2 * np.pi) ** -0.5,
                                                      abs=1e-13)


def test_gaussian_self_transform():
    geo = ScreenGeometry.interval(-8.0, 8.0)
    quad = SpatialQuadrature.for_geometry(geo, 30.0)
    f = GridFunction.sample(lambda p: np.exp(-p[:, 0] ** 2 / 2.0), quad)
    assert abs(fourier_transform(f, 1.0) - np.exp(-0.5)) < 1e-8


def test_conjugate_symmetry_for_real_density():
    quad = SpatialQuadrature.for_geometry(LINE, 60.0)
    f = GridFunction.sample(base_bump(LINE), quad)
    xi = np.linspace(0.25, 40.0, 23).reshape(-1, 1)
    fwd = nudft(quad.nodes, quad.weights, f.values.real, xi)
    bwd = nudft(quad.nodes, quad.weights, f.values.real, -xi)
    assert np.max(np.abs(bwd - np.conj(fwd))) <= 1e-12 * np.max(np.abs(fwd))


# ---------------------------------------------------------------------------
# ring-graded frequency rule
# ---------------------------------------------------------------------------

def test_propagating_inverse_z_integral():
    quad = build_spectral_quadrature(1.0, LINE, 1e-8)
    prop = quad.propagating()
    z = z_symbol(quad.nodes, 1.0)
    val = np.sum(quad.weights[prop] / np.abs(z[prop]))
    assert abs(val - np.pi) < 1e-8


@pytest.mark.parametrize("geo,k", [(LINE, 1.0), (RECT, 5.0)])
def test_rule_reproduces_ball_measure(geo, k):
    quad = build_spectral_quadrature(k, geo, 1e-6)
    if geo.dim_surface == 1:
        expected = 2.0 * quad.cutoff
    else:
        expected = np.pi * quad.cutoff ** 2
    assert abs(np.sum(quad.weights) - expected) < 1e-8 * expected


@pytest.mark.parametrize("geo,k", [(LINE, 1.0), (RECT, 5.0)])
def test_no_node_sits_on_the_ring(geo, k):
    quad = build_spectral_quadrature(k, geo, 1e-6)
    assert np.min(np.abs(quad.radii() - k)) > 0


def test_rejects_bad_accuracy():
    with pytest.raises(ValueError):
        build_spectral_quadrature(1.0, LINE, accuracy=0.0)
    with pytest.raises(ValueError):
        build_spectral_quadrature(-1.0, LINE)


def test_refined_rule_agrees_on_singular_form():
    k = 4.0
    ws = SpectralWorkspace(LINE, k, 1e-8)
    F = ws.spectrum(base_bump(LINE))
    z = z_symbol(ws.quad.nodes, k)
    coarse = np.sum(ws.quad.weights / z * np.abs(F) ** 2)
    fine_quad = ws.quad.refine()
    Ff = SpectrumFunction.from_grid(
        GridFunction.sample(base_bump(LINE), ws.xquad))(fine_quad.nodes)
    fine = np.sum(fine_quad.weights / z_symbol(fine_quad.nodes, k)
                  * np.abs(Ff) ** 2)
    assert abs(coarse - fine) < 1e-8 * abs(fine)


# ---------------------------------------------------------------------------
# weighted norms
# ---------------------------------------------------------------------------

def test_plancherel_identity_on_bump():
    ws = SpectralWorkspace(LINE, 5.0, 1e-8)
    dens = base_bump(LINE)
    spec_norm = ws.sobolev_norm(ws.spectrum(dens), 0.0)
    spatial = GridFunction.sample(dens, ws.xquad).l2_norm()
    assert abs(spec_norm - spatial) <= 1e-7 * spatial


def test_weighted_norm_identities_on_gaussian():
    geo = ScreenGeometry.interval(-8.0, 8.0)
    ws = SpectralWorkspace(geo, 1.0, 1e-9, cutoff=16.0)
    F = ws.spectrum(gaussian(0.0, 1.0, dim=1))
    assert abs(ws.sobolev_norm(F, 0.0) - np.pi ** 0.25) < 1e-6
    expected = np.sqrt(1.5 * np.sqrt(np.pi))
    assert abs(ws.sobolev_norm(F, 1.0) - expected) < 1e-6
    expected_k3 = np.sqrt((9.0 + 0.5) * np.sqrt(np.pi))
    assert abs(ws.sobolev_norm(F, 1.0, k=3.0) - expected_k3) < 1e-6


def test_norm_equivalence_sandwich():
    rng = np.random.default_rng(11)
    ws = SpectralWorkspace(LINE, 1.0, 1e-8, cutoff=2000.0)
    for _ in range(10):
        h = rng.uniform(0.1, 0.3)
        c = rng.uniform(-0.4 + h, 0.4 - h)
        F = ws.spectrum(bump([c], [h], dim=1))
        s = rng.choice([-1.0, -0.5, 0.5, 1.0])
        k = float(np.exp(rng.uniform(np.log(0.3), np.log(20.0))))
        nk = np.sqrt(ws.norm_sq(F, s, k=k))
        n1 = np.sqrt(ws.norm_sq(F, s, k=1.0))
        assert min(1.0, k ** s) * n1 <= nk * (1 + 1e-9)
        assert nk <= max(1.0, k ** s) * n1 * (1 + 1e-9)


def test_norm_monotone_in_order_for_k_above_one():
    ws = SpectralWorkspace(LINE, 1.5, 1e-8)
    F = ws.spectrum(base_bump(LINE))
    norms = [ws.sobolev_norm(F, s) for s in (-1.0, -0.5, 0.0, 0.5, 1.0)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_sobolev_params_validation():
    with pytest.raises(ValueError):
        SobolevParams(order=0.5, wavenumber=0.0)
    with pytest.raises(ValueError):
        SobolevParams(order=np.inf, wavenumber=1.0)


def test_sobolev_norm_accepts_spectrum_function():
    quad = build_spectral_quadrature(2.0, LINE, 1e-6)
    fhat = SpectrumFunction.from_callable(
        lambda xi: np.exp(-np.sum(xi ** 2, axis=1)), dim=1)
    val = sobolev_norm(fhat, SobolevParams(0.0, 2.0), quad)
    assert val == pytest.approx((np.pi / 2.0) ** 0.25, rel=1e-8)


# ---------------------------------------------------------------------------
# tensor fast path consistency
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("geo,k", [(LINE, 6.0), (RECT, 3.0)])
def test_tensor_spectra_match_dense_transform(geo, k):
    ws = SpectralWorkspace(geo, k, 1e-4, extra_freq=k)
    fam = DensityFamily(geo, seed=2)
    members = fam.members(k)[:4] + [fam.modulated_witness(k)]
    fast = ws.spectra(members)
    vals = np.stack([d(ws.xquad.nodes) for d in members], axis=1)
    dense = nudft(ws.xquad.nodes, ws.xquad.weights, vals, ws.quad.nodes)
    assert np.max(np.abs(fast - dense)) <= 1e-11 * np.max(np.abs(dense))
