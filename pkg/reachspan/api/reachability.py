"""Reachability API endpoints"""
import asyncio
import logging
from typing import Any, Dict, List, Optional

import numpy as np
from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from reachspan.core.errors import NUMERICAL_ERRORS, ReachspanError
from reachspan.core.horizon import add_environment, build_projection
from reachspan.core.robot import BUNDLED_ROBOTS, load_robot_file
from reachspan.polytope.ichm import ichm
from reachspan.polytope.links import link_reachable
from reachspan.polytope.mesh import polytope_document
from reachspan.services.scenario import Scenario, ScenarioDocument, parse_scenario

logger = logging.getLogger(__name__)

router = APIRouter()


class PolytopeRequest(BaseModel):
    """Request model for polytope computation"""
    scenario: ScenarioDocument = Field(..., description="Scenario with a bundled robot name or an inline robot document")
    delta: Optional[float] = Field(default=None, gt=0, description="Face improvement threshold in metres")
    seed: Optional[int] = Field(default=None, description="Seed for the random seeding directions")


class PolytopeResponse(BaseModel):
    """Response model for a single polytope"""
    robot: str
    t_h: float
    feasible: bool
    x_k: List[float]
    polytope: Dict[str, Any]


class LinksResponse(BaseModel):
    """Response model for link envelopes"""
    robot: str
    t_h: float
    links: Dict[str, Dict[str, Any]]


class RobotSummary(BaseModel):
    name: str
    joints: int
    total_mass: float
    has_cartesian_limits: bool


def _scenario(req: PolytopeRequest) -> Scenario:
    robot = req.scenario.robot
    if isinstance(robot, str) and robot not in BUNDLED_ROBOTS:
        raise HTTPException(status_code=422, detail=f"unknown robot {robot!r}; use one of {list(BUNDLED_ROBOTS)} or an inline document")
    try:
        return parse_scenario(req.scenario.model_dump(), name="request")
    except ReachspanError as e:
        raise HTTPException(status_code=422, detail=str(e))


def _compute_polytope(scenario: Scenario, delta: Optional[float], seed: Optional[int]) -> PolytopeResponse:
    problem = build_projection(
        scenario.model, scenario.state, scenario.t_h,
        frame=scenario.frame, local_point=scenario.local_point, dims=scenario.dims,
    )
    if scenario.environment is not None:
        problem = add_environment(problem, scenario.environment)
    poly = ichm(problem, delta=delta, seed=seed)
    return PolytopeResponse(
        robot=scenario.model.name,
        t_h=scenario.t_h,
        feasible=not poly.is_empty,
        x_k=np.asarray(problem.x_k).tolist(),
        polytope=polytope_document(poly),
    )


def _compute_links(scenario: Scenario, delta: Optional[float], seed: Optional[int]) -> LinksResponse:
    links = {}
    for envelope in scenario.links:
        poly = link_reachable(
            scenario.model, scenario.state, envelope, scenario.t_h,
            delta=delta, dims=scenario.dims, environment=scenario.environment, seed=seed,
        )
        links[envelope.name] = polytope_document(poly)
    return LinksResponse(robot=scenario.model.name, t_h=scenario.t_h, links=links)


async def _run(func, *args):
    try:
        return await asyncio.to_thread(func, *args)
    except ReachspanError as e:
        logger.warning(f"Request rejected: {e}")
        raise HTTPException(status_code=422, detail=str(e))
    except NUMERICAL_ERRORS as e:
        logger.error(f"Numerical failure: {e}", exc_info=True)
        raise HTTPException(status_code=422, detail=f"numerical failure: {e}")
    except Exception as e:
        logger.error(f"Polytope computation failed: {e}", exc_info=True)
        raise HTTPException(status_code=500, detail=str(e))


@router.get("/robots", response_model=List[RobotSummary])
async def list_robots():
    """Robots shipped with the package"""
    summaries = []
    for name in BUNDLED_ROBOTS:
        model = load_robot_file(name)
        summaries.append(RobotSummary(
            name=model.name,
            joints=model.n,
            total_mass=model.total_mass,
            has_cartesian_limits=model.cartesian_limits is not None,
        ))
    return summaries


@router.post("/polytope", response_model=PolytopeResponse)
async def compute_polytope(req: PolytopeRequest):
    """
    Reachable polytope of the scenario's tracked point

    Args:
        req: Scenario plus optional accuracy and seed

    Returns:
        Polytope document (empty with feasible=false when no torque satisfies the limits)
    """
    scenario = _scenario(req)
    logger.info(f"Polytope request for {scenario.model.name} at t_h={scenario.t_h}")
    return await _run(_compute_polytope, scenario, req.delta, req.seed)


@router.post("/links", response_model=LinksResponse)
async def compute_links(req: PolytopeRequest):
    """Reachable polytope of every link envelope in the scenario"""
    scenario = _scenario(req)
    if not scenario.links:
        raise HTTPException(status_code=422, detail="scenario defines no link envelopes")
    logger.info(f"Links request for {scenario.model.name}: {len(scenario.links)} envelopes")
    return await _run(_compute_links, scenario, req.delta, req.seed)
