import numpy as np
import pytest

from screenwave.densities import (DensityFamily, base_bump, bump, combine,
                                  gaussian, modulate, unit_bump)
from screenwave.geometry import ScreenGeometry


def test_unit_bump_support_and_smoothness():
    t = np.array([-1.5, -1.0, -0.9, 0.0, 0.9, 1.0, 2.0])
    v = unit_bump(t)
    assert v[0] == 0 and v[1] == 0 and v[5] == 0 and v[6] == 0
    assert v[3] == pytest.approx(np.exp(-1.0))
    assert np.all(v >= 0)


def test_bump_tensor_product_values():
    b = bump([0.2, -0.1], [0.3, 0.4])
    pts = np.array([[0.2, -0.1], [0.2, 0.35], [0.6, -0.1]])
    vals = b(pts)
    assert vals[0] == pytest.approx(np.exp(-2.0))
    assert vals[1] != 0          # inside along both axes
    assert vals[2] == 0          # outside first axis


def test_modulation_is_a_pure_phase():
    b = bump([0.0], [0.4])
    m = modulate(b, [7.0])
    x = np.array([[0.1], [-0.2], [0.3]])
    assert np.allclose(m(x), b(x) * np.exp(7j * x[:, 0]), rtol=0, atol=1e-15)


def test_combine_is_linear():
    b1 = bump([-0.2], [0.2])
    b2 = bump([0.25], [0.15])
    c = combine([2.0, -0.5j], [b1, b2])
    x = np.array([[-0.2], [0.25], [0.0]])
    assert np.allclose(c(x), 2.0 * b1(x) - 0.5j * b2(x), atol=1e-15)


def test_gaussian_density():
    g = gaussian(0.0, 1.0, dim=1)
    assert g(np.array([[0.0]]))[0] == pytest.approx(1.0)
    assert abs(g(np.array([[2.0]]))[0]) == pytest.approx(np.exp(-2.0))


@pytest.mark.parametrize("geo", [
    ScreenGeometry.interval(-0.5, 0.5),
    ScreenGeometry.rect((-0.5, 0.5), (-0.5, 0.5)),
])
def test_ensemble_supported_inside_screen(geo):
    fam = DensityFamily(geo, seed=3)
    members = fam.members(k=4.0)
    assert len(members) == 20
    rng = np.random.default_rng(0)
    outside = rng.uniform(0.55, 2.0, size=(40, geo.dim_surface)) \
        * rng.choice([-1.0, 1.0], size=(40, geo.dim_surface))
    for dens in members:
        assert np.allclose(dens(outside), 0.0)


def test_ensemble_deterministic_in_seed():
    geo = ScreenGeometry.interval(-0.5, 0.5)
    x = np.linspace(-0.45, 0.45, 17).reshape(-1, 1)
    a = [d(x) for d in DensityFamily(geo, seed=42).members(3.0)]
    b = [d(x) for d in DensityFamily(geo, seed=42).members(3.0)]
    c = [d(x) for d in DensityFamily(geo, seed=43).members(3.0)]
    for va, vb in zip(a, b):
        assert np.array_equal(va, vb)
    assert any(not np.array_equal(va, vc) for va, vc in zip(a, c))


def test_ensemble_bases_fixed_across_wavenumbers():
    geo = ScreenGeometry.interval(-0.5, 0.5)
    fam = DensityFamily(geo, seed=5)
    x = np.linspace(-0.4, 0.4, 11).reshape(-1, 1)
    low = fam.members(2.0)
    high = fam.members(64.0)
    # unmodulated combinations are identical; modulated ones differ in phase
    for i in range(10):
        assert np.array_equal(low[i](x), high[i](x))
    mods_low = low[10](x)
    mods_high = high[10](x)
    assert np.allclose(np.abs(mods_low), np.abs(mods_high), atol=1e-15)
    assert not np.allclose(mods_low, mods_high)


def test_base_bump_fills_screen():
    geo = ScreenGeometry.interval(0.0, 2.0)
    b = base_bump(geo)
    assert b(np.array([[1.0]]))[0] == pytest.approx(np.exp(-1.0))
    assert b(np.array([[1.95]]))[0] == 0.0
