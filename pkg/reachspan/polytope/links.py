"""Reachable space of a whole link, from polytopes at the corners of its envelope"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

from reachspan.config import settings
from reachspan.core.errors import FrameIndexError
from reachspan.core.horizon import EnvironmentConstraints, HorizonSpec, add_environment, build_projection
from reachspan.core.robot import RobotModel, RobotState
from reachspan.polytope.hull import Polytope, hull_union
from reachspan.polytope.ichm import ichm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinkEnvelope:
    """
    Convex region bounding a link, given by the points that span it

    kind is "segment" (start and end points), "vertices" (an explicit list) or "box"
    (the 8 corners of an axis-aligned box in one joint frame, built with `box`).
    """
    kind: Literal["segment", "vertices", "box"]
    points: tuple[tuple[int, tuple[float, float, float]], ...]
    name: str = "link"

    def __post_init__(self):
        minimum = {"segment": 2, "vertices": 1, "box": 8}[self.kind]
        if len(self.points) < minimum:
            raise ValueError(f"{self.kind} envelope needs at least {minimum} points, got {len(self.points)}")
        if self.kind == "segment" and len(self.points) != 2:
            raise ValueError("segment envelope takes exactly a start and an end point")

    @classmethod
    def segment(cls, start: tuple[int, Sequence[float]], end: tuple[int, Sequence[float]], name: str = "link"):
        return cls("segment", (_entry(*start), _entry(*end)), name)

    @classmethod
    def vertices(cls, entries: Sequence[tuple[int, Sequence[float]]], name: str = "link"):
        return cls("vertices", tuple(_entry(f, p) for f, p in entries), name)

    @classmethod
    def box(cls, frame: int, lower: Sequence[float], upper: Sequence[float], name: str = "link"):
        corners = itertools.product(*zip(lower, upper))
        return cls("box", tuple(_entry(frame, corner) for corner in corners), name)

    def check_frames(self, model: RobotModel):
        for frame, _ in self.points:
            if not 0 <= frame < model.n:
                raise FrameIndexError(f"envelope {self.name} references frame {frame}, model has {model.n} joints")


def _entry(frame: int, point: Sequence[float]) -> tuple[int, tuple[float, float, float]]:
    point = tuple(float(v) for v in point)
    if len(point) != 3:
        raise ValueError("envelope points must be 3-vectors")
    return int(frame), point


def link_reachable(
    model: RobotModel,
    state: RobotState,
    envelope: LinkEnvelope,
    horizon: HorizonSpec | float,
    delta: Optional[float] = None,
    dims: Sequence[int] = (0, 1, 2),
    environment: Optional[EnvironmentConstraints] = None,
    seed: Optional[int] = None,
    backend: Optional[str] = None,
) -> Polytope:
    """
    Hull of the reachable polytopes of every envelope point

    Infeasible points contribute nothing; each one is recorded under meta["warnings"].

    Returns:
        Polytope with meta["points"] (envelope size) and meta["skipped"]
    """
    envelope.check_frames(model)
    polys, warnings = [], []
    # coincident points give identical polytopes
    unique_points = list(dict.fromkeys(envelope.points))
    for frame, point in unique_points:
        problem = build_projection(model, state, horizon, frame=frame, local_point=point, dims=dims)
        if environment is not None:
            problem = add_environment(problem, environment)
        poly = ichm(problem, delta=delta, seed=seed, backend=backend)
        if poly.is_empty:
            message = f"{envelope.name}: point {point} on frame {frame} has an empty reachable set"
            logger.warning(message)
            warnings.append(message)
            continue
        polys.append(poly)

    m = len(tuple(dims))
    if not polys:
        result = Polytope.empty(m, settings.delta if delta is None else delta)
    else:
        result = hull_union(polys)
    result.meta.update(
        envelope=envelope.name,
        points=len(envelope.points),
        skipped=len(warnings),
        warnings=warnings,
        lp_count=sum(p.meta.get("lp_count", 0) for p in polys),
    )
    logger.info(f"Link envelope {envelope.name}: {len(polys)} point polytopes, {result.vertices.shape[0]} vertices")
    return result
