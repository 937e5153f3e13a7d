import numpy as np
import pytest

from screenwave.geometry import (GridFunction, ScreenGeometry,
                                 SpatialQuadrature, as_points, gauss_panels,
                                 panel_breakpoints)


def test_interval_geometry_basics():
    geo = ScreenGeometry.interval(0.0, 1.0)
    assert geo.diameter == 1.0
    assert geo.measure == 1.0
    assert geo.dim_surface == 1
    assert geo.centroid[0] == pytest.approx(0.5)


def test_union_of_intervals_diameter_spans_gaps():
    geo = ScreenGeometry.union_of_intervals([(0.0, 0.25), (0.75, 1.0)])
    assert geo.diameter == 1.0
    assert geo.measure == pytest.approx(0.5)
    inside = geo.contains([[0.1], [0.5], [0.8]])
    assert inside.tolist() == [True, False, True]


def test_overlapping_intervals_rejected():
    with pytest.raises(ValueError):
        ScreenGeometry.union_of_intervals([(0.0, 0.6), (0.5, 1.0)])


def test_rectangle_diameter_is_diagonal():
    geo = ScreenGeometry.rect((0.0, 3.0), (0.0, 4.0))
    assert geo.diameter == pytest.approx(5.0)
    assert geo.measure == pytest.approx(12.0)


def test_bad_geometry_inputs():
    with pytest.raises(ValueError):
        ScreenGeometry.interval(1.0, 1.0)
    with pytest.raises(ValueError):
        ScreenGeometry(dim_ambient=4, intervals=((0, 1),))
    with pytest.raises(ValueError):
        ScreenGeometry(dim_ambient=3, rectangle=((0.0, 1.0), (2.0, 2.0)))


@pytest.mark.parametrize("geo", [
    ScreenGeometry.interval(-0.3, 0.9),
    ScreenGeometry.union_of_intervals([(-1.0, -0.2), (0.1, 0.4)]),
    ScreenGeometry.rect((-0.5, 0.5), (0.0, 0.75)),
])
def test_quadrature_weights_sum_to_measure(geo):
    quad = SpatialQuadrature.for_geometry(geo, max_freq=25.0)
    assert np.sum(quad.weights) == pytest.approx(geo.measure, rel=1e-12)
    assert np.all(geo.contains(quad.nodes))
    assert quad.size >= 2


def test_panel_phase_budget_resolves_oscillation():
    omega = 37.0
    nodes, weights = gauss_panels(panel_breakpoints(0.0, 2.0, omega))
    val = np.sum(weights * np.exp(1j * omega * nodes))
    exact = (np.exp(2j * omega) - 1.0) / (1j * omega)
    assert abs(val - exact) < 1e-10


def test_as_points_shapes():
    assert as_points(0.3, 1).shape == (1, 1)
    assert as_points([1.0, 2.0, 3.0], 1).shape == (3, 1)
    assert as_points([1.0, 2.0], 2).shape == (1, 2)
    assert as_points(np.zeros((5, 2)), 2).shape == (5, 2)
    with pytest.raises(ValueError):
        as_points(np.zeros((5, 3)), 2)
    with pytest.raises(ValueError):
        as_points(1.0, 2)


def test_grid_function_validation():
    geo = ScreenGeometry.interval(0.0, 1.0)
    quad = SpatialQuadrature.for_geometry(geo, 10.0)
    with pytest.raises(ValueError):
        GridFunction(quad=quad, values=np.ones(quad.size + 1))
    bad = np.ones(quad.size, dtype=complex)
    bad[0] = np.nan
    with pytest.raises(ValueError):
        GridFunction(quad=quad, values=bad)
    gf = GridFunction(quad=quad, values=np.ones(quad.size))
    assert gf.l2_norm() == pytest.approx(1.0, rel=1e-12)
