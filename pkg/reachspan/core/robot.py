"""Robot description documents and the immutable serial-chain model"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Annotated, List, Mapping, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from scipy.spatial.transform import Rotation

from reachspan.core.errors import (
    ModelValidationError,
    RobotDescriptionError,
    StateOutOfLimitsError,
)

logger = logging.getLogger(__name__)

Vec3 = Annotated[List[float], Field(min_length=3, max_length=3)]
Pair = Annotated[List[float], Field(min_length=2, max_length=2)]
Inertia6 = Annotated[List[float], Field(min_length=6, max_length=6)]

AXIS_TOLERANCE = 1e-9
BUNDLED_ROBOTS = ("planar2", "generic7")


# ---------------------------------------------------------------------------
# Document schema
# ---------------------------------------------------------------------------

class OriginDocument(BaseModel):
    """Rigid transform from the parent joint frame"""
    model_config = ConfigDict(extra="forbid")

    xyz: Vec3 = [0.0, 0.0, 0.0]
    rpy: Vec3 = [0.0, 0.0, 0.0]


class JointDocument(BaseModel):
    """One revolute joint and the link it moves"""
    model_config = ConfigDict(extra="forbid")

    origin: OriginDocument = OriginDocument()
    axis: Vec3
    mass: float
    com: Vec3 = [0.0, 0.0, 0.0]
    inertia: Inertia6 = Field(
        default=[0.0] * 6,
        description="ixx, iyy, izz, ixy, ixz, iyz about the link COM"
    )
    tau: Pair
    qd: Pair
    q: Pair


class CartesianLimitsDocument(BaseModel):
    """Constant datasheet limits used by the cube baseline"""
    model_config = ConfigDict(extra="forbid")

    xdd: Pair
    xd: Pair


class RobotDocument(BaseModel):
    """Top-level robot description"""
    model_config = ConfigDict(extra="forbid")

    name: str
    gravity: Vec3 = [0.0, 0.0, -9.81]
    joints: List[JointDocument] = Field(min_length=1)
    end_effector: Vec3 = [0.0, 0.0, 0.0]
    cartesian_limits: Optional[CartesianLimitsDocument] = None


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

def _frozen(values, shape=None) -> np.ndarray:
    array = np.array(values, dtype=float)
    if shape is not None:
        array = array.reshape(shape)
    array.flags.writeable = False
    return array


def inertia_from_components(components: Sequence[float]) -> np.ndarray:
    """Build the symmetric 3x3 tensor from (ixx, iyy, izz, ixy, ixz, iyz)"""
    ixx, iyy, izz, ixy, ixz, iyz = (float(v) for v in components)
    return np.array([
        [ixx, ixy, ixz],
        [ixy, iyy, iyz],
        [ixz, iyz, izz],
    ])


def parallel_axis(mass: float, offset: np.ndarray) -> np.ndarray:
    """Inertia of a point mass at `offset` about the origin"""
    offset = np.asarray(offset, dtype=float)
    return mass * (offset @ offset * np.eye(3) - np.outer(offset, offset))


def _is_psd(tensor: np.ndarray) -> bool:
    if not np.allclose(tensor, tensor.T, atol=1e-12):
        return False
    scale = max(1.0, float(np.abs(tensor).max()))
    return bool(np.linalg.eigvalsh(tensor).min() >= -1e-12 * scale)


@dataclass(frozen=True, eq=False)
class JointSpec:
    """Revolute joint, its placement in the parent frame, and its link's inertia"""
    origin_xyz: np.ndarray
    origin_rpy: np.ndarray
    axis: np.ndarray
    link_mass: float
    link_com: np.ndarray
    link_inertia: np.ndarray
    tau_limits: tuple[float, float]
    qd_limits: tuple[float, float]
    q_limits: tuple[float, float]
    origin_rotation: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "origin_xyz", _frozen(self.origin_xyz, (3,)))
        object.__setattr__(self, "origin_rpy", _frozen(self.origin_rpy, (3,)))
        object.__setattr__(self, "axis", _frozen(self.axis, (3,)))
        object.__setattr__(self, "link_com", _frozen(self.link_com, (3,)))
        object.__setattr__(self, "link_inertia", _frozen(self.link_inertia, (3, 3)))
        object.__setattr__(self, "link_mass", float(self.link_mass))
        for name in ("tau_limits", "qd_limits", "q_limits"):
            low, high = getattr(self, name)
            object.__setattr__(self, name, (float(low), float(high)))
        # URDF convention: fixed-axis roll, pitch, yaw
        rotation = Rotation.from_euler("xyz", self.origin_rpy).as_matrix()
        object.__setattr__(self, "origin_rotation", _frozen(rotation))


@dataclass(frozen=True, eq=False)
class CartesianLimits:
    """Per-axis Cartesian acceleration and velocity limits"""
    xdd_min: np.ndarray
    xdd_max: np.ndarray
    xd_min: np.ndarray
    xd_max: np.ndarray

    def __post_init__(self):
        for name in ("xdd_min", "xdd_max", "xd_min", "xd_max"):
            value = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), (3,))
            object.__setattr__(self, name, _frozen(value))

    @classmethod
    def symmetric(cls, acceleration: float, velocity: float) -> "CartesianLimits":
        return cls(-acceleration, acceleration, -velocity, velocity)


@dataclass(frozen=True, eq=False)
class RobotModel:
    """Fixed-base serial chain of revolute joints; immutable after construction"""
    name: str
    joints: tuple[JointSpec, ...]
    gravity: np.ndarray
    end_effector: np.ndarray = field(default_factory=lambda: np.zeros(3))
    cartesian_limits: Optional[CartesianLimits] = None

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "gravity", _frozen(self.gravity, (3,)))
        object.__setattr__(self, "end_effector", _frozen(self.end_effector, (3,)))
        self._validate()

    def _validate(self):
        if not self.joints:
            raise ModelValidationError("robot model needs at least one joint (n >= 1)")
        if not np.all(np.isfinite(self.gravity)):
            raise ModelValidationError("gravity must be finite")
        for index, joint in enumerate(self.joints):
            label = f"joint {index + 1} (index {index})"
            if abs(np.linalg.norm(joint.axis) - 1.0) > AXIS_TOLERANCE:
                raise ModelValidationError(f"{label}: axis must be a unit vector, |axis| = {np.linalg.norm(joint.axis):.12g}")
            for kind in ("tau", "qd", "q"):
                low, high = getattr(joint, f"{kind}_limits")
                if not (np.isfinite(low) and np.isfinite(high)):
                    raise ModelValidationError(f"{label}: {kind} limits must be finite")
                if not low < high:
                    raise ModelValidationError(f"{label}: {kind}_min < {kind}_max violated ({low} >= {high})")
            if joint.link_mass < 0:
                raise ModelValidationError(f"{label}: link mass must be >= 0, got {joint.link_mass}")
            if not _is_psd(joint.link_inertia):
                raise ModelValidationError(f"{label}: link inertia must be symmetric positive semi-definite")

    @property
    def n(self) -> int:
        return len(self.joints)

    @property
    def ee_frame(self) -> int:
        return self.n - 1

    @cached_property
    def tau_min(self) -> np.ndarray:
        return _frozen([j.tau_limits[0] for j in self.joints])

    @cached_property
    def tau_max(self) -> np.ndarray:
        return _frozen([j.tau_limits[1] for j in self.joints])

    @cached_property
    def qd_min(self) -> np.ndarray:
        return _frozen([j.qd_limits[0] for j in self.joints])

    @cached_property
    def qd_max(self) -> np.ndarray:
        return _frozen([j.qd_limits[1] for j in self.joints])

    @cached_property
    def q_min(self) -> np.ndarray:
        return _frozen([j.q_limits[0] for j in self.joints])

    @cached_property
    def q_max(self) -> np.ndarray:
        return _frozen([j.q_limits[1] for j in self.joints])

    @property
    def total_mass(self) -> float:
        return float(sum(j.link_mass for j in self.joints))


@dataclass(frozen=True, eq=False)
class RobotState:
    """Joint positions and velocities at the start of a horizon"""
    q: np.ndarray
    qd: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", _frozen(self.q))
        object.__setattr__(self, "qd", _frozen(self.qd))
        if self.q.ndim != 1 or self.q.shape != self.qd.shape:
            raise ValueError("q and qd must be 1-D vectors of equal length")

    @classmethod
    def at_rest(cls, q: Sequence[float]) -> "RobotState":
        return cls(np.asarray(q, dtype=float), np.zeros(len(q)))

    def check_within(self, model: RobotModel, tol: float = 1e-12):
        """Raise StateOutOfLimitsError unless q and qd lie inside the model's boxes"""
        if self.q.shape != (model.n,):
            raise StateOutOfLimitsError(f"state has {self.q.shape[0]} joints, model {model.name} has {model.n}")
        for kind, values, low, high in (
            ("q", self.q, model.q_min, model.q_max),
            ("qd", self.qd, model.qd_min, model.qd_max),
        ):
            outside = np.flatnonzero((values < low - tol) | (values > high + tol))
            if outside.size:
                i = int(outside[0])
                raise StateOutOfLimitsError(
                    f"joint {i + 1} (index {i}): {kind}={values[i]:.6g} outside [{low[i]:.6g}, {high[i]:.6g}]"
                )


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def _format_validation_error(error: ValidationError) -> str:
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "<document>"
    return f"{location}: {first['msg']}"


def parse_robot(data: Mapping) -> RobotModel:
    """Build a RobotModel from an already-decoded robot document"""
    try:
        document = RobotDocument.model_validate(data)
    except ValidationError as e:
        raise RobotDescriptionError(_format_validation_error(e)) from e

    joints = tuple(
        JointSpec(
            origin_xyz=j.origin.xyz,
            origin_rpy=j.origin.rpy,
            axis=j.axis,
            link_mass=j.mass,
            link_com=j.com,
            link_inertia=inertia_from_components(j.inertia),
            tau_limits=tuple(j.tau),
            qd_limits=tuple(j.qd),
            q_limits=tuple(j.q),
        )
        for j in document.joints
    )
    limits = None
    if document.cartesian_limits is not None:
        cl = document.cartesian_limits
        limits = CartesianLimits(cl.xdd[0], cl.xdd[1], cl.xd[0], cl.xd[1])

    return RobotModel(
        name=document.name,
        joints=joints,
        gravity=document.gravity,
        end_effector=document.end_effector,
        cartesian_limits=limits,
    )


def load_robot(document: str | bytes) -> RobotModel:
    """
    Parse robot-description JSON text

    Args:
        document: JSON text following the robot description format

    Returns:
        Validated RobotModel

    Raises:
        RobotDescriptionError: malformed JSON (with line/column) or schema violation (with field path)
        ModelValidationError: an invariant of the model is violated
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as e:
        raise RobotDescriptionError(f"line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise RobotDescriptionError("line 1 column 1: top level must be a JSON object")
    return parse_robot(data)


def bundled_robot_path(name: str):
    """Traversable for one of the robot descriptions shipped with the package"""
    return resources.files("reachspan").joinpath("data", f"{name}.json")


def load_robot_file(path: str | Path) -> RobotModel:
    """Load a bundled robot by name (planar2, generic7), or a robot description from disk"""
    candidate = Path(path)
    if str(path) in BUNDLED_ROBOTS:
        text = bundled_robot_path(str(path)).read_text(encoding="utf-8")
    elif candidate.is_file():
        text = candidate.read_text(encoding="utf-8")
    elif candidate.stem in BUNDLED_ROBOTS and not candidate.parent.parts:
        text = bundled_robot_path(candidate.stem).read_text(encoding="utf-8")
    else:
        raise RobotDescriptionError(f"robot description not found: {path}")
    model = load_robot(text)
    logger.debug(f"Loaded robot {model.name} with {model.n} joints from {path}")
    return model


def augment_payload(
    model: RobotModel,
    mass: float,
    com_offset: Sequence[float] = (0.0, 0.0, 0.0),
    inertia: Sequence[float] | np.ndarray | None = None,
) -> RobotModel:
    """
    Rigidly attach a carried object to the terminal link

    Masses add, the COM is mass-weighted and inertias combine by the parallel-axis rule.

    Args:
        model: Robot to augment (left unchanged)
        mass: Payload mass in kg
        com_offset: Payload COM in the last joint frame
        inertia: 3x3 tensor or (ixx, iyy, izz, ixy, ixz, iyz) about the payload COM

    Returns:
        New RobotModel with the composite terminal link
    """
    if mass < 0:
        raise ModelValidationError(f"payload mass must be >= 0, got {mass}")
    if inertia is None:
        payload_inertia = np.zeros((3, 3))
    else:
        payload_inertia = np.asarray(inertia, dtype=float)
        if payload_inertia.shape == (6,):
            payload_inertia = inertia_from_components(payload_inertia)
    if payload_inertia.shape != (3, 3) or not _is_psd(payload_inertia):
        raise ModelValidationError("payload inertia must be a symmetric positive semi-definite 3x3 tensor")

    last = model.joints[-1]
    payload_com = np.asarray(com_offset, dtype=float)
    total = last.link_mass + mass
    if total > 0:
        com = (last.link_mass * last.link_com + mass * payload_com) / total
    else:
        com = np.array(last.link_com)
    composite = (
        last.link_inertia + parallel_axis(last.link_mass, last.link_com - com)
        + payload_inertia + parallel_axis(mass, payload_com - com)
    )
    terminal = replace(last, link_mass=total, link_com=com, link_inertia=composite)
    logger.debug(f"Payload {mass} kg attached to {model.name}, terminal link mass {total} kg")
    return replace(model, name=f"{model.name}+payload", joints=model.joints[:-1] + (terminal,))
