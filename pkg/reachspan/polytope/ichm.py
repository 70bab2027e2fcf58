"""
Iterative convex hull projection of {P·τ : A·τ ≤ b}

Support LPs along the axes (and a few random directions if needed) give an inner
simplex; every face whose normal still admits a point more than δ beyond it gets that
point inserted into an incremental Qhull hull. The loop stops when no face improves by
more than δ, so the true projection lies within δ outside every returned face.

Projections of lower affine dimension are enumerated inside their own subspace and
lifted back through the generator torques, so every vertex stays an exact LP image.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from reachspan.config import settings
from reachspan.core.errors import HullComputationError, UnboundedProblemError
from reachspan.core.horizon import ProjectionProblem, check_feasibility
from reachspan.polytope.hull import Polytope, affine_frame, convex_hull, polytope_from_qhull
from reachspan.polytope.lp import LPStatus, make_program

logger = logging.getLogger(__name__)

NORMAL_DIGITS = 12


class _Support:
    """Support-function oracle over the torque polytope, with LP bookkeeping"""

    def __init__(self, P: np.ndarray, program):
        self.P = P
        self.program = program
        self.lp_count = 0
        self.points: list[np.ndarray] = []
        self.torques: list[np.ndarray] = []
        self.actives: list[Optional[tuple[int, ...]]] = []

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    def solve(self, direction: np.ndarray, start=None):
        result = self.program.maximize(self.P.T @ direction, start=start)
        self.lp_count += 1
        if result.status is LPStatus.UNBOUNDED:
            raise UnboundedProblemError(f"support LP unbounded along {np.round(direction, 6).tolist()}")
        if result.status is not LPStatus.OPTIMAL:
            logger.warning(f"Support LP along {np.round(direction, 6).tolist()} returned {result.status.value}")
            return None
        return result

    def keep(self, result) -> int:
        self.points.append(self.P @ result.x)
        self.torques.append(result.x)
        self.actives.append(result.active)
        return len(self.points) - 1

    def query(self, direction: np.ndarray):
        result = self.solve(direction)
        if result is not None:
            self.keep(result)


class _Hull:
    """Qhull over the support points; incremental until Qhull rejects an insertion"""

    def __init__(self, points: np.ndarray):
        self.joggled = False
        self.qhull = self._build(points)

    def _build(self, points: np.ndarray) -> ConvexHull:
        if not self.joggled:
            try:
                return ConvexHull(points, incremental=True)
            except QhullError as e:
                logger.debug(f"Incremental Qhull rejected {points.shape[0]} points, rebuilding joggled: {e}")
                self.joggled = True
        try:
            return ConvexHull(points, qhull_options="QJ")
        except QhullError as e:
            raise HullComputationError(f"Qhull failed on {points.shape[0]} support points: {e}") from e

    def extend(self, points: np.ndarray, count: int):
        """Insert the last `count` rows of `points`"""
        if not self.joggled:
            try:
                self.qhull.add_points(points[-count:])
                return
            except QhullError as e:
                logger.warning(f"Incremental Qhull failed on {count} new points, rebuilding joggled: {e}")
                self.joggled = True
        self.qhull = self._build(points)

    def close(self):
        if not self.joggled:
            self.qhull.close()


@dataclass
class _Outcome:
    rank: int
    frame: Optional[np.ndarray] = None
    polytope: Optional[Polytope] = None
    rounds: int = 0
    converged: bool = True
    joggled: bool = False


def _enumerate(
    support: _Support, delta: float, rng: np.random.Generator, max_rounds: int
) -> _Outcome:
    """
    Seed and refine the hull of the support points in the oracle's own coordinates

    Stops early, without a polytope, when the seeds do not span the full dimension.
    """
    m = support.dim
    for axis in range(m):
        for sign in (1.0, -1.0):
            direction = np.zeros(m)
            direction[axis] = sign
            support.query(direction)
    if not support.points:
        return _Outcome(rank=-1, converged=False)

    rank, frame, _ = affine_frame(np.array(support.points))
    extra = 0
    while rank < m and extra < 3 * m:
        direction = rng.standard_normal(m)
        support.query(direction / np.linalg.norm(direction))
        extra += 1
        rank, frame, _ = affine_frame(np.array(support.points))
    if rank < m:
        return _Outcome(rank=rank, frame=frame)

    hull = _Hull(np.array(support.points))
    cache: dict[tuple, tuple[float, object]] = {}
    converged = False
    rounds = 0
    try:
        for rounds in range(1, max_rounds + 1):
            candidates = _refine_round(hull.qhull, support, cache, delta)
            if not candidates:
                converged = True
                break
            for _, _, result in candidates:
                support.keep(result)
            hull.extend(np.array(support.points), len(candidates))
            logger.debug(f"ICHM round {rounds}: {len(candidates)} points added, {hull.qhull.vertices.size} vertices")
        else:
            logger.warning(f"ICHM stopped after {max_rounds} rounds without converging to delta={delta}")
        polytope = polytope_from_qhull(hull.qhull, delta, np.array(support.torques))
    finally:
        hull.close()
    return _Outcome(rank=m, frame=frame, polytope=polytope, rounds=rounds, converged=converged, joggled=hull.joggled)


def ichm(
    problem: ProjectionProblem,
    delta: Optional[float] = None,
    seed: Optional[int] = None,
    backend: Optional[str] = None,
    max_rounds: Optional[int] = None,
) -> Polytope:
    """
    Enumerate the task-space polytope x = P·τ + x*, A·τ ≤ b to accuracy δ

    Args:
        problem: Projection problem (possibly with environment rows)
        delta: Face improvement threshold in metres (default settings.delta)
        seed: Seed for the random seeding directions (default settings.seed)
        backend: LP backend name (default settings.lp_backend)
        max_rounds: Cap on refinement rounds (default settings.ichm_max_rounds)

    Returns:
        Polytope in world coordinates with per-vertex generator torques; empty when infeasible

    Raises:
        HullComputationError: Qhull failed even on joggled input
    """
    delta = settings.delta if delta is None else float(delta)
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    seed = settings.seed if seed is None else seed
    max_rounds = settings.ichm_max_rounds if max_rounds is None else max_rounds
    m = problem.m

    if not check_feasibility(problem, backend).feasible:
        logger.warning(f"Projection problem at t_h={problem.t_h} is infeasible, reachable set is empty")
        return Polytope.empty(m, delta, meta={"feasible": False, "lp_count": 1, "rounds": 0})

    program = make_program(problem.A, problem.b, backend)
    rng = np.random.default_rng(seed)
    support = _Support(problem.P, program)
    outcome = _enumerate(support, delta, rng, max_rounds)
    if outcome.rank < 0:
        return Polytope.empty(m, delta, meta={"feasible": False, "lp_count": support.lp_count, "rounds": 0})

    meta = {"feasible": True, "t_h": problem.t_h, "seed": seed}
    if outcome.rank == m:
        meta.update(
            lp_count=support.lp_count, rounds=outcome.rounds, degenerate=False,
            converged=outcome.converged, joggled=outcome.joggled,
        )
        poly = replace(outcome.polytope, meta=meta)
        logger.debug(f"ICHM done: {poly.vertices.shape[0]} vertices, {support.lp_count} LPs, {outcome.rounds} rounds")
        return poly.translated(problem.x_star)

    logger.warning(f"Projection at t_h={problem.t_h} is flat (affine dimension {outcome.rank} < {m})")
    torques, lp_count, rounds, converged = _flat_torques(problem, support, outcome, delta, rng, max_rounds)
    torques = np.array(torques)
    meta.update(lp_count=lp_count, rounds=rounds, degenerate=True, converged=converged)
    poly = convex_hull(torques @ problem.P.T, tol=delta, generators=torques, meta=meta)
    return poly.translated(problem.x_star)


def _flat_torques(
    problem: ProjectionProblem,
    support: _Support,
    outcome: _Outcome,
    delta: float,
    rng: np.random.Generator,
    max_rounds: int,
):
    """Generator torques of a projection whose affine hull has dimension outcome.rank < m"""
    rank = outcome.rank
    if rank == 0:
        return support.torques, support.lp_count, 0, True
    if rank == 1:
        axis = outcome.frame[0]
        support.query(axis)
        support.query(-axis)
        return support.torques, support.lp_count, 0, True

    # refine inside the plane spanned by the leading frame rows
    flat = _Support(outcome.frame[:rank] @ problem.P, support.program)
    inner = _enumerate(flat, delta, rng, max_rounds)
    return support.torques + flat.torques, support.lp_count + flat.lp_count, inner.rounds, inner.converged


def _refine_round(hull: ConvexHull, support: _Support, cache: dict, delta: float):
    """One pass over the hull faces; returns the insertions, largest improvement first"""
    equations = hull.equations
    m = equations.shape[1] - 1
    vertex_ids = hull.vertices
    vertex_points = hull.points[vertex_ids]

    candidates = []
    seen = set()
    for row in equations:
        normal = row[:m]
        offset = -row[m]
        key = tuple(np.round(normal, NORMAL_DIGITS))
        if key in seen:
            continue
        seen.add(key)
        if key not in cache:
            best = int(vertex_ids[int(np.argmax(vertex_points @ normal))])
            start = support.actives[best] if best < len(support.actives) else None
            result = support.solve(normal, start=start)
            cache[key] = (float("-inf") if result is None else result.value, result)
        value, result = cache[key]
        improvement = value - offset
        if result is not None and improvement > delta:
            candidates.append((improvement, key, result))

    candidates.sort(key=lambda item: (-item[0], item[1]))
    unique, taken = [], set()
    for improvement, key, result in candidates:
        spot = tuple(np.round(support.P @ result.x, NORMAL_DIGITS))
        if spot in taken:
            continue
        taken.add(spot)
        unique.append((improvement, key, result))
    return unique


def max_face_gap(poly: Polytope, problem: ProjectionProblem, backend: Optional[str] = None) -> float:
    """
    Largest LP improvement beyond any face of an ICHM polytope

    Returns:
        max over faces of (support value − face offset); ≤ δ for a converged result
    """
    if poly.is_empty or poly.is_degenerate:
        return 0.0
    program = make_program(problem.A, problem.b, backend)
    gap = float("-inf")
    for normal, offset in zip(poly.H, poly.d):
        result = program.maximize(problem.P.T @ normal)
        if result.status is not LPStatus.OPTIMAL:
            raise UnboundedProblemError(f"face LP returned {result.status.value}")
        gap = max(gap, result.value + float(normal @ problem.x_star) - float(offset))
    return gap
