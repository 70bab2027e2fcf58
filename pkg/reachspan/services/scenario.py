"""Scenario documents: robot, start state, horizon, environment and link envelopes"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, List, Literal, Mapping, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from reachspan.core.errors import ScenarioError
from reachspan.core.horizon import EnvironmentConstraints
from reachspan.core.robot import (
    BUNDLED_ROBOTS,
    RobotDocument,
    RobotModel,
    RobotState,
    augment_payload,
    load_robot_file,
    parse_robot,
)
from reachspan.polytope.links import LinkEnvelope

logger = logging.getLogger(__name__)

Vec3 = Annotated[List[float], Field(min_length=3, max_length=3)]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PayloadDocument(_Strict):
    mass: float = Field(ge=0)
    com: Vec3 = [0.0, 0.0, 0.0]
    inertia: Optional[Annotated[List[float], Field(min_length=6, max_length=6)]] = None


class EnvironmentDocument(_Strict):
    A: List[List[float]]
    b: List[float]


class PointRef(_Strict):
    frame: int = Field(ge=0)
    point: Vec3 = [0.0, 0.0, 0.0]


class SegmentLinkDocument(_Strict):
    kind: Literal["segment"]
    name: str = "link"
    start: PointRef
    end: PointRef


class VertexLinkDocument(_Strict):
    kind: Literal["vertices"]
    name: str = "link"
    points: List[PointRef] = Field(min_length=1)


class BoxLinkDocument(_Strict):
    kind: Literal["box"]
    name: str = "link"
    frame: int = Field(ge=0)
    lower: Vec3
    upper: Vec3


LinkDocument = Annotated[
    Union[SegmentLinkDocument, VertexLinkDocument, BoxLinkDocument], Field(discriminator="kind")
]


class ScenarioDocument(_Strict):
    robot: Union[str, RobotDocument]
    q: List[float]
    qd: Optional[List[float]] = None
    t_h: float = Field(gt=0)
    frame: Optional[int] = Field(default=None, ge=0)
    local_point: Optional[Vec3] = None
    dims: List[int] = Field(default=[0, 1, 2], min_length=2, max_length=3)
    payload: Optional[PayloadDocument] = None
    environment: Optional[EnvironmentDocument] = None
    links: List[LinkDocument] = []


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    model: RobotModel
    state: RobotState
    t_h: float
    frame: Optional[int] = None
    local_point: Optional[np.ndarray] = None
    dims: tuple[int, ...] = (0, 1, 2)
    environment: Optional[EnvironmentConstraints] = None
    links: list[LinkEnvelope] = field(default_factory=list)


def _envelope(document) -> LinkEnvelope:
    if document.kind == "segment":
        return LinkEnvelope.segment(
            (document.start.frame, document.start.point), (document.end.frame, document.end.point), document.name
        )
    if document.kind == "vertices":
        return LinkEnvelope.vertices([(p.frame, p.point) for p in document.points], document.name)
    return LinkEnvelope.box(document.frame, document.lower, document.upper, document.name)


def _resolve_robot(robot: Union[str, RobotDocument], base_dir: Optional[Path]) -> RobotModel:
    if isinstance(robot, RobotDocument):
        return parse_robot(robot.model_dump())
    if robot in BUNDLED_ROBOTS:
        return load_robot_file(robot)
    candidate = Path(robot)
    if base_dir is not None and not candidate.is_absolute() and (base_dir / candidate).is_file():
        candidate = base_dir / candidate
    return load_robot_file(candidate if candidate.is_file() else robot)


def parse_scenario(data: Mapping, base_dir: Optional[Path] = None, name: str = "scenario") -> Scenario:
    """
    Build a Scenario from a decoded document

    Args:
        data: Scenario mapping
        base_dir: Directory relative robot paths are resolved against
        name: Label used in logs and output files

    Returns:
        Scenario with payload applied to the model
    """
    try:
        document = ScenarioDocument.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "<document>"
        raise ScenarioError(f"{location}: {first['msg']}") from e

    model = _resolve_robot(document.robot, base_dir)
    if document.payload is not None:
        model = augment_payload(model, document.payload.mass, document.payload.com, document.payload.inertia)

    if len(document.q) != model.n:
        raise ScenarioError(f"q has {len(document.q)} entries, robot {model.name} has {model.n} joints")
    qd = document.qd if document.qd is not None else [0.0] * model.n
    if len(qd) != model.n:
        raise ScenarioError(f"qd has {len(qd)} entries, robot {model.name} has {model.n} joints")

    environment = None
    if document.environment is not None and document.environment.b:
        environment = EnvironmentConstraints(np.array(document.environment.A), np.array(document.environment.b))
        if environment.A_e.shape[1] != len(document.dims):
            raise ScenarioError(
                f"environment rows have {environment.A_e.shape[1]} columns, scenario tracks {len(document.dims)} coordinates"
            )

    return Scenario(
        name=name,
        model=model,
        state=RobotState(np.array(document.q, dtype=float), np.array(qd, dtype=float)),
        t_h=document.t_h,
        frame=document.frame,
        local_point=None if document.local_point is None else np.array(document.local_point),
        dims=tuple(document.dims),
        environment=environment,
        links=[_envelope(link) for link in document.links],
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario JSON file; relative robot paths resolve against its directory"""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ScenarioError(f"scenario not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be a JSON object")
    scenario = parse_scenario(data, base_dir=path.parent, name=path.stem)
    logger.info(f"Loaded scenario {scenario.name}: robot {scenario.model.name}, t_h={scenario.t_h}")
    return scenario
