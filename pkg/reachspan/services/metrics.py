"""
Accuracy metrics for predicted polytopes and the Cartesian cube baseline

m1: share of simulated points inside the polytope
m2: volume of the hull of the contained points over the polytope volume
m3: polytope volume over the volume of the hull of all simulated points
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from reachspan.core.errors import BaselineError, DegeneratePolytopeError
from reachspan.core.robot import CartesianLimits
from reachspan.polytope.hull import Polytope, convex_hull
from reachspan.services.simulation import ReachedSet

logger = logging.getLogger(__name__)


def _points(reached: ReachedSet | np.ndarray) -> np.ndarray:
    points = reached.points if isinstance(reached, ReachedSet) else np.atleast_2d(np.asarray(reached, dtype=float))
    if points.shape[0] == 0:
        raise ValueError("reached set is empty")
    return points


def metric_m1(reached: ReachedSet | np.ndarray, poly: Polytope, eps: float) -> float:
    points = _points(reached)
    return float(np.count_nonzero(poly.contains_points(points, eps)) / points.shape[0])


def metric_m2(reached: ReachedSet | np.ndarray, poly: Polytope, eps: float = 0.0) -> Optional[float]:
    """
    Fraction of the polytope volume covered by simulated points it contains

    Returns:
        Ratio in [0, 1], 0 when the contained points are flat, None when the polytope has no volume
    """
    points = _points(reached)
    poly_volume = poly.volume
    if poly_volume <= 0:
        return None
    inside = points[poly.contains_points(points, eps)]
    if inside.shape[0] <= poly.m:
        return 0.0
    return min(1.0, convex_hull(inside).volume / poly_volume)


def metric_m3(reached: ReachedSet | np.ndarray, poly: Polytope) -> float:
    """
    Polytope volume over the volume of the hull of every simulated point

    Raises:
        DegeneratePolytopeError: when either the polytope or the simulated points span no volume
    """
    points = _points(reached)
    if poly.is_degenerate:
        raise DegeneratePolytopeError(f"polytope of affine dimension {poly.affine_dim} has no volume")
    reached_volume = convex_hull(points).volume
    if reached_volume <= 0:
        raise DegeneratePolytopeError("simulated points span no volume")
    return poly.volume / reached_volume


def cube_baseline(
    x_k,
    xd_k,
    limits: CartesianLimits,
    t_h: float,
    velocity_aware: bool = False,
    dims=(0, 1, 2),
) -> Polytope:
    """
    Axis-aligned box reachable under constant Cartesian acceleration and velocity limits

    Per axis the acceleration is restricted to [max(ẍ_min, ẋ_min/t_h), min(ẍ_max, ẋ_max/t_h)];
    with velocity_aware the velocity bound becomes ẋ_k + ẍ·t_h ∈ [ẋ_min, ẋ_max].

    Raises:
        BaselineError: when the acceleration interval is empty on some axis
    """
    if not t_h > 0:
        raise ValueError(f"horizon must be positive, got {t_h}")
    idx = list(dims)
    x_k = np.asarray(x_k, dtype=float)
    xd_k = np.asarray(xd_k, dtype=float)
    xd_min, xd_max = limits.xd_min[idx], limits.xd_max[idx]
    if velocity_aware:
        xd_min, xd_max = xd_min - xd_k, xd_max - xd_k
    low = np.maximum(limits.xdd_min[idx], xd_min / t_h)
    high = np.minimum(limits.xdd_max[idx], xd_max / t_h)
    if np.any(low > high):
        axis = int(np.flatnonzero(low > high)[0])
        raise BaselineError(f"no admissible acceleration on axis {axis} at t_h={t_h}")

    half = 0.5 * t_h * t_h
    centre = x_k + xd_k * t_h
    lower, upper = centre + low * half, centre + high * half
    corners = np.array(np.meshgrid(*zip(lower, upper), indexing="ij")).reshape(len(idx), -1).T
    return convex_hull(corners, meta={"baseline": "cube"})


@dataclass
class MetricsReport:
    config_id: int
    seed: int
    t_h: float
    n_vertices: int
    m1: float
    m2: Optional[float]
    m3: Optional[float]
    vol_Px: float
    vol_R1: float
    vol_R2: float
    vol_Cx: Optional[float]
    poly_ms: Optional[float]
    m1_Cx: Optional[float] = None
    m2_Cx: Optional[float] = None
    m3_Cx: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


def evaluate_metrics(
    reached: ReachedSet,
    poly: Polytope,
    eps: float,
    cube: Optional[Polytope] = None,
    **ids,
) -> MetricsReport:
    """Score a polytope (and optionally the cube baseline) against one reached set"""
    points = _points(reached)
    inside = points[poly.contains_points(points, eps)]
    vol_R1 = convex_hull(inside).volume if inside.shape[0] > poly.m else 0.0
    vol_R2 = convex_hull(points).volume
    try:
        m3 = metric_m3(points, poly)
    except DegeneratePolytopeError as e:
        logger.warning(f"m3 undefined at t_h={ids.get('t_h')}: {e}")
        m3 = None

    cube_scores = {}
    if cube is not None:
        cube_scores = {
            "m1_Cx": metric_m1(points, cube, eps),
            "m2_Cx": metric_m2(points, cube, eps),
            "m3_Cx": cube.volume / vol_R2 if vol_R2 > 0 else None,
        }

    return MetricsReport(
        n_vertices=poly.vertices.shape[0],
        m1=metric_m1(points, poly, eps),
        m2=metric_m2(points, poly, eps),
        m3=m3,
        vol_Px=poly.volume,
        vol_R1=vol_R1,
        vol_R2=vol_R2,
        vol_Cx=None if cube is None else cube.volume,
        **cube_scores,
        **ids,
    )
