"""OBJ and JSON export of polytopes"""
from __future__ import annotations

import json
import logging
from typing import Literal, Sequence

import numpy as np
import trimesh

from reachspan.core.errors import DegeneratePolytopeError
from reachspan.polytope.hull import Polytope

logger = logging.getLogger(__name__)

MeshFormat = Literal["obj", "json"]


def to_trimesh(poly: Polytope) -> trimesh.Trimesh:
    """
    Triangle mesh of a full-dimensional polytope

    Planar polytopes are lifted to z = 0 and fan-triangulated, facing +z.
    """
    if poly.is_empty or poly.is_degenerate:
        raise DegeneratePolytopeError(
            f"cannot mesh a polytope of affine dimension {poly.affine_dim} in R^{poly.m}"
        )
    if poly.m == 2:
        vertices = np.hstack([poly.vertices, np.zeros((poly.vertices.shape[0], 1))])
        ring = poly.faces[:, 0]
        faces = np.stack([np.full(ring.size - 2, ring[0]), ring[1:-1], ring[2:]], axis=1)
    else:
        vertices, faces = poly.vertices, poly.faces
    return trimesh.Trimesh(vertices=vertices, faces=faces, process=False)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def polytope_document(poly: Polytope) -> dict:
    return {
        "m": poly.m,
        "affine_dim": poly.affine_dim,
        "vertices": poly.vertices.tolist(),
        "faces": poly.faces.tolist(),
        "normals": poly.normals.tolist(),
        "H": poly.H.tolist(),
        "d": poly.d.tolist(),
        "volume": poly.volume,
        "delta": poly.tolerance,
        "generators": None if poly.generators is None else poly.generators.tolist(),
        "meta": poly.meta,
    }


def export_mesh(poly: Polytope, format: MeshFormat = "obj") -> bytes:
    """
    Serialise a polytope

    Args:
        poly: Polytope to write
        format: "obj" (1-based outward-wound triangles, needs a full-dimensional polytope)
            or "json" (both representations, volume and δ)

    Returns:
        UTF-8 encoded file contents
    """
    if format == "obj":
        text = trimesh.exchange.obj.export_obj(
            to_trimesh(poly),
            include_normals=False,
            include_color=False,
            include_texture=False,
            digits=12,
        )
        return text.encode("utf-8")
    if format == "json":
        return json.dumps(polytope_document(poly), default=_jsonable, indent=2).encode("utf-8")
    raise ValueError(f"unknown mesh format {format!r}")


def export_scene(polys: Sequence[Polytope]) -> bytes:
    """One OBJ holding every full-dimensional polytope in the list"""
    meshes = [to_trimesh(p) for p in polys if not p.is_empty and not p.is_degenerate]
    if not meshes:
        raise DegeneratePolytopeError("no full-dimensional polytope to put in the scene")
    combined = trimesh.util.concatenate(meshes)
    return trimesh.exchange.obj.export_obj(
        combined, include_normals=False, include_color=False, include_texture=False, digits=12
    ).encode("utf-8")


def load_polytope_json(data: str | bytes) -> Polytope:
    """Inverse of export_mesh(..., "json")"""
    document = json.loads(data)
    m = int(document["m"])
    generators = document.get("generators")
    return Polytope(
        vertices=np.array(document["vertices"], dtype=float).reshape(-1, m),
        faces=np.array(document["faces"], dtype=int).reshape(-1, m),
        normals=np.array(document["normals"], dtype=float).reshape(-1, m),
        H=np.array(document["H"], dtype=float).reshape(-1, m),
        d=np.array(document["d"], dtype=float),
        affine_dim=int(document["affine_dim"]),
        tolerance=float(document.get("delta", 0.0)),
        generators=None if generators is None else np.array(generators, dtype=float),
        meta=dict(document.get("meta") or {}),
    )
