"""
Convex polytopes in 2-D and 3-D

A Polytope keeps both representations: irredundant vertices with outward-wound faces,
and the half-spaces H·x ≤ d. Flat inputs produce lower-dimensional polytopes whose
H-representation pins the missing directions with pairs of opposite rows.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

logger = logging.getLogger(__name__)

ABS_TOL = 1e-9
RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Polytope:
    """
    Bounded convex set in R^m, m ∈ {2, 3}

    Attributes:
        vertices: (k, m) irredundant vertex list
        faces: (f, 3) outward-wound triangles for m = 3, (f, 2) counter-clockwise edges for m = 2;
            empty when the polytope is flat
        normals: (f, m) unit outward normal of each face
        H, d: half-space representation H·x ≤ d with unit-norm rows
        affine_dim: dimension of the affine hull, -1 for the empty set
        tolerance: accuracy the polytope was built with (δ for ICHM output)
        generators: optional (k, n) torque that produced each vertex
        meta: free-form bookkeeping (LP count, refinement rounds, warnings)
    """
    vertices: np.ndarray
    faces: np.ndarray
    normals: np.ndarray
    H: np.ndarray
    d: np.ndarray
    affine_dim: int
    tolerance: float = 0.0
    generators: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.vertices.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.affine_dim < 0

    @property
    def is_degenerate(self) -> bool:
        return self.affine_dim < self.m

    @classmethod
    def empty(cls, m: int, tolerance: float = 0.0, meta: Optional[dict] = None) -> "Polytope":
        return cls(
            vertices=np.zeros((0, m)),
            faces=np.zeros((0, m), dtype=int),
            normals=np.zeros((0, m)),
            H=np.zeros((0, m)),
            d=np.zeros(0),
            affine_dim=-1,
            tolerance=tolerance,
            meta=dict(meta or {}),
        )

    def translated(self, offset) -> "Polytope":
        offset = np.asarray(offset, dtype=float)
        if self.is_empty:
            return self
        return replace(
            self,
            vertices=self.vertices + offset,
            d=self.d + self.H @ offset,
            meta=dict(self.meta),
        )

    def contains(self, point, eps: float = 0.0) -> bool:
        return bool(self.contains_points(np.atleast_2d(point), eps)[0])

    def contains_points(self, points, eps: float = 0.0) -> np.ndarray:
        """Closed-set membership of each row of `points` within eps"""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_empty:
            return np.zeros(points.shape[0], dtype=bool)
        return np.all(points @ self.H.T <= self.d + eps, axis=1)

    @property
    def volume(self) -> float:
        return volume(self)

    @property
    def surface_area(self) -> float:
        if self.is_degenerate:
            return 0.0
        if self.m == 2:
            edges = self.vertices[self.faces[:, 1]] - self.vertices[self.faces[:, 0]]
            return float(np.linalg.norm(edges, axis=1).sum())
        a, b, c = (self.vertices[self.faces[:, k]] for k in range(3))
        return float(0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1).sum())

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


def _unique_halfspaces(H: np.ndarray, d: np.ndarray):
    if H.shape[0] == 0:
        return H, d
    key = np.round(np.hstack([H, d[:, None]]), 10)
    _, first = np.unique(key, axis=0, return_index=True)
    keep = np.sort(first)
    return H[keep], d[keep]


def polytope_from_qhull(
    hull: ConvexHull,
    tol: float = 0.0,
    generators: Optional[np.ndarray] = None,
    meta: Optional[dict] = None,
) -> Polytope:
    """Full-dimensional Polytope from a scipy ConvexHull over `hull.points`"""
    points = hull.points
    m = points.shape[1]
    vertex_ids = np.sort(hull.vertices) if m == 3 else np.asarray(hull.vertices)
    remap = np.full(points.shape[0], -1, dtype=int)
    remap[vertex_ids] = np.arange(vertex_ids.size)
    vertices = points[vertex_ids]

    if m == 2:
        # 2-D hull vertices come counter-clockwise
        k = vertex_ids.size
        faces = np.stack([np.arange(k), np.roll(np.arange(k), -1)], axis=1)
        edges = vertices[faces[:, 1]] - vertices[faces[:, 0]]
        normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offsets = np.einsum("ij,ij->i", normals, vertices[faces[:, 0]])
        H, d = normals, offsets
    else:
        faces = remap[hull.simplices]
        normals = hull.equations[:, :3]
        a, b, c = (vertices[faces[:, j]] for j in range(3))
        flip = np.einsum("ij,ij->i", np.cross(b - a, c - a), normals) < 0
        faces[flip] = faces[flip][:, [0, 2, 1]]
        H, d = _unique_halfspaces(normals, -hull.equations[:, 3])

    return Polytope(
        vertices=vertices,
        faces=faces.astype(int),
        normals=np.array(normals),
        H=np.array(H),
        d=np.array(d),
        affine_dim=m,
        tolerance=tol,
        generators=None if generators is None else np.asarray(generators)[vertex_ids],
        meta=dict(meta or {}),
    )


def _flat_polytope(points: np.ndarray, rank: int, frame: np.ndarray, centre: np.ndarray, tol, generators, meta):
    """Polytope of affine dimension rank < m, spanned by the first rank rows of `frame`"""
    m = points.shape[1]
    span, normal_dirs = frame[:rank], frame[rank:]
    local = (points - centre) @ span.T

    if rank == 0:
        ids = np.array([0])
        rows, offsets = [], []
    elif rank == 1:
        ids = np.unique([int(np.argmin(local[:, 0])), int(np.argmax(local[:, 0]))])
        u = span[0]
        rows = [u, -u]
        offsets = [float(points[ids].dot(u).max()), float(-points[ids].dot(u).min())]
    else:
        flat = ConvexHull(local)
        ids = np.asarray(flat.vertices)
        corner = local[ids]
        edges = np.roll(corner, -1, axis=0) - corner
        normals_2d = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
        normals_2d /= np.linalg.norm(normals_2d, axis=1, keepdims=True)
        lifted = normals_2d @ span
        rows = list(lifted)
        offsets = list(np.einsum("ij,ij->i", lifted, points[ids]))

    for w in normal_dirs:
        level = float(w @ centre)
        rows += [w, -w]
        offsets += [level, -level]

    return Polytope(
        vertices=points[ids],
        faces=np.zeros((0, m), dtype=int),
        normals=np.zeros((0, m)),
        H=np.array(rows, dtype=float).reshape(-1, m),
        d=np.array(offsets, dtype=float),
        affine_dim=rank,
        tolerance=tol,
        generators=None if generators is None else np.asarray(generators)[ids],
        meta=dict(meta or {}),
    )


def affine_frame(points: np.ndarray):
    """
    Affine rank of a point cloud

    Returns:
        (rank, orthonormal frame rows ordered by spread, centroid)
    """
    centre = points.mean(axis=0)
    spread = points - centre
    _, s, vt = np.linalg.svd(spread, full_matrices=True)
    radius = float(np.linalg.norm(spread, axis=1).max(initial=0.0))
    threshold = RANK_TOL * max(radius, np.abs(centre).max(initial=0.0), 1e-300) * np.sqrt(points.shape[0])
    rank = int(np.sum(s > threshold))
    return rank, vt, centre


def convex_hull(
    points: Iterable[Sequence[float]],
    tol: float = 0.0,
    generators: Optional[np.ndarray] = None,
    meta: Optional[dict] = None,
) -> Polytope:
    """
    Convex hull of a finite point set

    Args:
        points: (k, m) array-like, k ≥ 1, m ∈ {2, 3}
        tol: Accuracy recorded on the result
        generators: Optional (k, n) per-point data carried over to the surviving vertices
        meta: Bookkeeping copied onto the result

    Returns:
        Polytope; flat inputs give affine_dim < m with zero volume
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        raise ValueError("convex_hull needs at least one point")
    m = points.shape[1]
    if m not in (2, 3):
        raise ValueError(f"only 2-D and 3-D hulls are supported, got m={m}")

    rank, frame, centre = affine_frame(points)
    if rank == m:
        try:
            return polytope_from_qhull(ConvexHull(points), tol, generators, meta)
        except QhullError as e:
            logger.debug(f"Qhull rejected a {points.shape[0]}-point hull, treating it as flat: {e}")
            rank = m - 1
    return _flat_polytope(points, rank, frame, centre, tol, generators, meta)


def volume(poly: Polytope) -> float:
    """Volume (area for m = 2) as a sum of simplices about the centroid; 0 when flat"""
    if poly.is_degenerate:
        return 0.0
    c = poly.centroid
    if poly.m == 2:
        a = poly.vertices[poly.faces[:, 0]] - c
        b = poly.vertices[poly.faces[:, 1]] - c
        return float(0.5 * np.sum(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]))
    a, b, e = (poly.vertices[poly.faces[:, k]] - c for k in range(3))
    return float(np.einsum("ij,ij->i", a, np.cross(b, e)).sum() / 6.0)


def contains(poly: Polytope, point, eps: float = 0.0) -> bool:
    """True iff H·x ≤ d + eps for every row"""
    return poly.contains(point, eps)


def hull_union(polys: Sequence[Polytope], tol: Optional[float] = None) -> Polytope:
    """
    Convex hull of the union of several polytopes

    Vertices are sorted before hulling so the result does not depend on input order.
    Empty inputs contribute nothing.
    """
    if not polys:
        raise ValueError("hull_union needs at least one polytope")
    m = polys[0].m
    if any(p.m != m for p in polys):
        raise ValueError("hull_union inputs must share the same dimension")
    tol = max(p.tolerance for p in polys) if tol is None else tol
    present = [p for p in polys if not p.is_empty]
    if not present:
        return Polytope.empty(m, tol)

    points = np.vstack([p.vertices for p in present])
    generators = None
    if all(p.generators is not None for p in present) and len({p.generators.shape[1] for p in present}) == 1:
        generators = np.vstack([p.generators for p in present])
    order = np.lexsort(points.T[::-1])
    points = points[order]
    if generators is not None:
        generators = generators[order]
    return convex_hull(points, tol=tol, generators=generators)
