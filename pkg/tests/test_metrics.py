import itertools

import numpy as np
import pytest

from reachspan.core.errors import BaselineError, DegeneratePolytopeError
from reachspan.core.robot import CartesianLimits
from reachspan.polytope.hull import convex_hull
from reachspan.services.metrics import cube_baseline, evaluate_metrics, metric_m1, metric_m2, metric_m3


def _cube(half=0.5):
    return convex_hull(np.array(list(itertools.product((-half, half), repeat=3))))


def test_m1_counts_contained_points():
    points = np.array([[0.0, 0.0, 0.0], [0.4, 0.4, 0.4], [0.9, 0.0, 0.0], [0.0, 0.0, 2.0]])
    assert metric_m1(points, _cube(), eps=0.0) == pytest.approx(0.5)
    assert metric_m1(points, _cube(), eps=0.5) == pytest.approx(0.75)


def test_m2_is_covered_fraction():
    inner = np.array(list(itertools.product((-0.25, 0.25), repeat=3)))
    assert metric_m2(inner, _cube()) == pytest.approx(0.125)


def test_m2_is_zero_when_contained_points_are_flat():
    flat = np.array([[0.0, 0.0, 0.0], [0.1, 0.0, 0.0], [0.0, 0.1, 0.0], [5.0, 5.0, 5.0]])
    assert metric_m2(flat, _cube()) == 0.0


def test_m2_undefined_for_flat_polytope():
    flat = convex_hull([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert metric_m2(np.zeros((1, 3)), flat) is None


def test_m3_compares_volumes():
    outer = np.array(list(itertools.product((-1.0, 1.0), repeat=3)))
    assert metric_m3(outer, _cube()) == pytest.approx(1.0 / 8.0)


def test_m3_needs_spread_points():
    with pytest.raises(DegeneratePolytopeError):
        metric_m3(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), _cube())


def test_empty_reached_set():
    with pytest.raises(ValueError):
        metric_m1(np.zeros((0, 3)), _cube(), eps=0.0)


def test_cube_baseline_acceleration_bound():
    limits = CartesianLimits.symmetric(10.0, 100.0)
    cube = cube_baseline(np.zeros(3), np.zeros(3), limits, 0.1)
    # half extent 10 * 0.1^2 / 2 = 0.05
    np.testing.assert_allclose(cube.vertices.min(axis=0), -0.05)
    np.testing.assert_allclose(cube.vertices.max(axis=0), 0.05)
    assert cube.volume == pytest.approx(0.1 ** 3)


def test_cube_baseline_velocity_bound_and_drift():
    limits = CartesianLimits.symmetric(10.0, 0.5)
    cube = cube_baseline(np.ones(3), np.array([0.1, 0.0, 0.0]), limits, 0.1)
    # acceleration capped at 0.5 / 0.1 = 5, half extent 0.025, centre moved by xd * t_h
    np.testing.assert_allclose(cube.vertices.min(axis=0), [1.01 - 0.025, 0.975, 0.975])
    np.testing.assert_allclose(cube.vertices.max(axis=0), [1.01 + 0.025, 1.025, 1.025])


def test_cube_baseline_planar_dims():
    limits = CartesianLimits.symmetric(10.0, 100.0)
    square = cube_baseline(np.zeros(2), np.zeros(2), limits, 0.1, dims=(0, 1))
    assert square.m == 2
    assert square.volume == pytest.approx(0.01)


def test_velocity_aware_baseline_can_be_empty():
    limits = CartesianLimits(-1.0, 1.0, 0.0, 0.5)
    with pytest.raises(BaselineError):
        cube_baseline(np.zeros(3), np.array([1.0, 0.0, 0.0]), limits, 0.1, velocity_aware=True)


def test_evaluate_metrics_report():
    cube = _cube()
    points = np.vstack([np.array(list(itertools.product((-0.4, 0.4), repeat=3))), [[2.0, 0.0, 0.0]]])
    report = evaluate_metrics(points, cube, 0.0, cube=_cube(1.0), config_id=3, seed=9, t_h=0.05, poly_ms=None)
    assert report.config_id == 3 and report.seed == 9
    assert report.n_vertices == 8
    assert report.m1 == pytest.approx(8 / 9)
    assert report.m2 == pytest.approx(0.8 ** 3)
    assert report.vol_Px == pytest.approx(1.0)
    assert report.vol_Cx == pytest.approx(8.0)
    assert report.m1_Cx == pytest.approx(8 / 9)
    assert report.m3 == pytest.approx(1.0 / report.vol_R2)
    assert report.m3_Cx == pytest.approx(8.0 / report.vol_R2)


def test_polytope_vertices_score_one():
    poly = convex_hull(np.random.default_rng(3).standard_normal((30, 3)))
    assert metric_m2(poly.vertices, poly, eps=1e-9) == pytest.approx(1.0)
    assert metric_m3(poly.vertices, poly) == pytest.approx(1.0)


def test_m3_undefined_for_flat_polytope():
    flat = convex_hull([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    with pytest.raises(DegeneratePolytopeError, match="affine dimension 2"):
        metric_m3(np.array(list(itertools.product((0.0, 1.0), repeat=3))), flat)


def test_report_leaves_m3_blank_for_flat_polytope():
    flat = convex_hull([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    points = np.array(list(itertools.product((0.0, 1.0), repeat=3)))
    report = evaluate_metrics(points, flat, 1e-9, cube=_cube(1.0), config_id=0, seed=0, t_h=0.05, poly_ms=None)
    assert report.m3 is None
    assert report.m2 is None
    assert report.m3_Cx == pytest.approx(8.0)
