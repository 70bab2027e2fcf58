import itertools

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from reachspan.polytope.hull import Polytope, contains, convex_hull, hull_union, volume


def _cube(half=1.0, centre=(0.0, 0.0, 0.0)):
    return np.array(list(itertools.product((-half, half), repeat=3))) + np.asarray(centre)


def test_unit_cube():
    cube = convex_hull(_cube(0.5))
    assert cube.vertices.shape == (8, 3)
    assert cube.affine_dim == 3
    assert volume(cube) == pytest.approx(1.0)
    assert cube.surface_area == pytest.approx(6.0)
    assert contains(cube, [0.0, 0.0, 0.0])
    assert not contains(cube, [0.6, 0.0, 0.0])
    assert contains(cube, [0.6, 0.0, 0.0], eps=0.2)


def test_interior_points_are_dropped(rng):
    points = np.vstack([_cube(), rng.uniform(-0.9, 0.9, size=(50, 3))])
    assert convex_hull(points).vertices.shape[0] == 8


def test_faces_wind_outward(rng):
    poly = convex_hull(rng.standard_normal((40, 3)))
    centre = poly.vertices.mean(axis=0)
    a, b, c = (poly.vertices[poly.faces[:, k]] for k in range(3))
    outward = np.einsum("ij,ij->i", np.cross(b - a, c - a), (a + b + c) / 3 - centre)
    assert np.all(outward > 0)


def test_volume_matches_qhull(rng):
    points = rng.standard_normal((60, 3))
    assert convex_hull(points).volume == pytest.approx(ConvexHull(points).volume, rel=1e-9)


def test_square_in_2d():
    square = convex_hull([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0], [1.0, 0.5]])
    assert square.vertices.shape == (4, 2)
    assert square.faces.shape == (4, 2)
    assert square.volume == pytest.approx(2.0)
    assert square.surface_area == pytest.approx(6.0)
    assert square.contains([1.0, 0.5])
    assert not square.contains([2.1, 0.5])


def test_h_representation_holds_every_vertex(rng):
    poly = convex_hull(rng.standard_normal((30, 3)))
    assert np.all(poly.vertices @ poly.H.T <= poly.d + 1e-9)


def test_flat_segment_in_3d():
    poly = convex_hull([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.5, 0.5, 0.5]])
    assert poly.affine_dim == 1
    assert poly.is_degenerate
    assert poly.volume == 0.0
    assert poly.vertices.shape[0] == 2
    assert poly.contains([0.25, 0.25, 0.25], eps=1e-9)
    assert not poly.contains([0.25, 0.0, 0.25], eps=1e-6)


def test_flat_triangle_in_3d():
    poly = convex_hull([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.2, 0.2, 1.0]])
    assert poly.affine_dim == 2
    assert poly.vertices.shape[0] == 3
    assert poly.contains([0.1, 0.1, 1.0], eps=1e-9)
    assert not poly.contains([0.1, 0.1, 1.01], eps=1e-6)


def test_single_point():
    poly = convex_hull([[1.0, 2.0, 3.0]])
    assert poly.affine_dim == 0
    assert poly.contains([1.0, 2.0, 3.0], eps=1e-9)


def test_generators_follow_vertices():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.2, 0.2]])
    generators = np.arange(8, dtype=float).reshape(4, 2)
    poly = convex_hull(points, generators=generators)
    for vertex, generator in zip(poly.vertices, poly.generators):
        index = int(np.flatnonzero(np.all(points == vertex, axis=1))[0])
        np.testing.assert_array_equal(generator, generators[index])


def test_translated():
    moved = convex_hull(_cube(0.5)).translated([1.0, 2.0, 3.0])
    assert moved.contains([1.0, 2.0, 3.0])
    assert not moved.contains([0.0, 0.0, 0.0])
    assert moved.volume == pytest.approx(1.0)


def test_empty_polytope():
    empty = Polytope.empty(3)
    assert empty.is_empty
    assert empty.volume == 0.0
    assert not empty.contains([0.0, 0.0, 0.0], eps=1.0)


def test_hull_union_is_order_independent():
    a = convex_hull(_cube(0.5))
    b = convex_hull(_cube(0.5, centre=(2.0, 0.0, 0.0)))
    ab, ba = hull_union([a, b]), hull_union([b, a])
    assert ab.volume == pytest.approx(3.0)
    np.testing.assert_array_equal(ab.vertices, ba.vertices)
    np.testing.assert_array_equal(ab.faces, ba.faces)


def test_hull_union_skips_empty():
    a = convex_hull(_cube(0.5))
    assert hull_union([Polytope.empty(3), a]).volume == pytest.approx(1.0)
    assert hull_union([Polytope.empty(3)]).is_empty


def test_hull_rejects_bad_input():
    with pytest.raises(ValueError):
        convex_hull(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        convex_hull(np.zeros((4, 4)))
    with pytest.raises(ValueError):
        hull_union([convex_hull(_cube()), convex_hull([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])])
