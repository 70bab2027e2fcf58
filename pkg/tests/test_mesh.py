import itertools
import json

import numpy as np
import pytest
import trimesh

from reachspan.core.errors import DegeneratePolytopeError
from reachspan.polytope.hull import Polytope, convex_hull
from reachspan.polytope.mesh import export_mesh, export_scene, load_polytope_json, to_trimesh


def _cube(half=0.5, centre=(0.0, 0.0, 0.0)):
    return convex_hull(np.array(list(itertools.product((-half, half), repeat=3))) + np.asarray(centre))


def _parse_obj(text):
    vertices, faces = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            vertices.append([float(v) for v in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(p.split("/")[0]) for p in parts[1:]])
    return np.array(vertices), np.array(faces)


def test_obj_is_one_based_and_watertight():
    cube = _cube()
    vertices, faces = _parse_obj(export_mesh(cube, "obj").decode("utf-8"))
    assert vertices.shape == (8, 3)
    assert faces.shape == (12, 3)
    assert faces.min() == 1 and faces.max() == 8
    mesh = trimesh.Trimesh(vertices=vertices, faces=faces - 1, process=False)
    assert mesh.is_watertight
    assert mesh.is_winding_consistent
    assert mesh.volume == pytest.approx(1.0)


def test_trimesh_volume_matches(rng):
    poly = convex_hull(rng.standard_normal((40, 3)))
    assert to_trimesh(poly).volume == pytest.approx(poly.volume, rel=1e-9)


def test_planar_polytope_is_lifted():
    square = convex_hull([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    mesh = to_trimesh(square)
    np.testing.assert_allclose(mesh.vertices[:, 2], 0.0)
    assert mesh.faces.shape == (2, 3)
    assert mesh.area == pytest.approx(1.0)
    assert np.all(mesh.face_normals[:, 2] > 0)


def test_flat_polytope_has_no_mesh():
    flat = convex_hull([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    with pytest.raises(DegeneratePolytopeError):
        export_mesh(flat, "obj")
    with pytest.raises(DegeneratePolytopeError):
        export_mesh(Polytope.empty(3), "obj")


def test_json_document():
    cube = _cube()
    document = json.loads(export_mesh(cube, "json"))
    assert document["m"] == 3
    assert document["volume"] == pytest.approx(1.0)
    assert len(document["vertices"]) == 8
    assert len(document["H"]) == len(document["d"]) == 6


def test_json_reloads():
    cube = _cube()
    cube = convex_hull(cube.vertices, tol=0.001, generators=np.arange(16.0).reshape(8, 2), meta={"lp_count": 12})
    again = load_polytope_json(export_mesh(cube, "json"))
    np.testing.assert_allclose(again.vertices, cube.vertices)
    np.testing.assert_array_equal(again.faces, cube.faces)
    np.testing.assert_allclose(again.generators, cube.generators)
    assert again.tolerance == 0.001
    assert again.meta["lp_count"] == 12
    assert again.volume == pytest.approx(cube.volume)


def test_empty_json_stub():
    document = json.loads(export_mesh(Polytope.empty(3, meta={"feasible": False}), "json"))
    assert document["vertices"] == []
    assert document["volume"] == 0.0
    assert document["meta"]["feasible"] is False


def test_scene_concatenates():
    text = export_scene([_cube(), _cube(centre=(2.0, 0.0, 0.0)), Polytope.empty(3)]).decode("utf-8")
    vertices, faces = _parse_obj(text)
    assert vertices.shape[0] == 16
    assert faces.shape[0] == 24


def test_unknown_format():
    with pytest.raises(ValueError):
        export_mesh(_cube(), "stl")
