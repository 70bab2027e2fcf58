"""
Horizon prediction

Applying a constant torque τ for a horizon t_h with the model frozen at the current
state moves the tracked point to x = P·τ + x*. The torque limits and the end-of-horizon
joint velocity and position boxes become linear rows A·τ ≤ b, so the reachable set is the
image of that torque polytope under P.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from reachspan.core.dynamics import (
    pose_jacobian,
    pose_jdot_qdot,
    resolve_frame,
    chain_pose,
    dynamics_terms,
    point_at,
    solve_mass,
)
from reachspan.core.errors import DimensionMismatchError
from reachspan.core.robot import RobotModel, RobotState

logger = logging.getLogger(__name__)


def _readonly(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class HorizonSpec:
    t_h: float

    def __post_init__(self):
        if not self.t_h > 0:
            raise ValueError(f"horizon must be positive, got {self.t_h}")


@dataclass(frozen=True, eq=False)
class EnvironmentConstraints:
    """Task-space half-spaces A_e·x ≤ b_e"""
    A_e: np.ndarray
    b_e: np.ndarray

    def __post_init__(self):
        A_e = np.asarray(self.A_e, dtype=float)
        b_e = np.asarray(self.b_e, dtype=float).reshape(-1)
        if A_e.size == 0:
            A_e = A_e.reshape(0, A_e.shape[-1] if A_e.ndim == 2 else 0)
        A_e = np.atleast_2d(A_e)
        if A_e.shape[0] != b_e.shape[0]:
            raise DimensionMismatchError(f"A_e has {A_e.shape[0]} rows but b_e has {b_e.shape[0]} entries")
        if not (np.all(np.isfinite(A_e)) and np.all(np.isfinite(b_e))):
            raise ValueError("environment constraints must be finite")
        object.__setattr__(self, "A_e", _readonly(A_e))
        object.__setattr__(self, "b_e", _readonly(b_e))

    @property
    def rows(self) -> int:
        return self.A_e.shape[0]

    @classmethod
    def none(cls, m: int) -> "EnvironmentConstraints":
        return cls(np.zeros((0, m)), np.zeros(0))

    @classmethod
    def from_bounds(cls, m: int, lower: dict[int, float] | None = None, upper: dict[int, float] | None = None):
        """Axis bounds such as {2: 0.5} for z ≥ 0.5"""
        rows, offsets = [], []
        for axis, value in (lower or {}).items():
            row = np.zeros(m)
            row[axis] = -1.0
            rows.append(row)
            offsets.append(-value)
        for axis, value in (upper or {}).items():
            row = np.zeros(m)
            row[axis] = 1.0
            rows.append(row)
            offsets.append(value)
        if not rows:
            return cls.none(m)
        return cls(np.array(rows), np.array(offsets))


@dataclass(frozen=True, eq=False)
class ProjectionProblem:
    """
    x = P·τ + x*, subject to A·τ ≤ b

    The first `n_torque_rows` rows come from the robot (torque, velocity and position
    limits); anything after them is environment rows mapped through P.
    """
    P: np.ndarray
    x_star: np.ndarray
    A: np.ndarray
    b: np.ndarray
    n_torque_rows: int
    tau_d: np.ndarray
    x_k: np.ndarray
    xd_k: np.ndarray
    t_h: float
    dims: tuple[int, ...] = (0, 1, 2)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("P", "x_star", "A", "b", "tau_d", "x_k", "xd_k"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        if self.A.shape[0] != self.b.shape[0] or self.A.shape[1] != self.P.shape[1]:
            raise DimensionMismatchError(
                f"constraint stack {self.A.shape} / {self.b.shape} does not match P {self.P.shape}"
            )
        if not np.all(np.isfinite(self.A)):
            raise ValueError("constraint matrix has non-finite entries")

    @property
    def m(self) -> int:
        return self.P.shape[0]

    @property
    def n(self) -> int:
        return self.P.shape[1]

    def image(self, tau) -> np.ndarray:
        return self.P @ np.asarray(tau, dtype=float) + self.x_star

    def natural_motion(self) -> np.ndarray:
        """End-of-horizon position when τ = τ_d, i.e. zero joint acceleration"""
        return self.image(self.tau_d)

    def satisfied(self, tau, tol: float = 1e-9) -> bool:
        residual = self.A @ np.asarray(tau, dtype=float) - self.b
        scale = np.maximum(1.0, np.abs(self.b))
        return bool(np.all(residual <= tol * scale))


def build_projection(
    model: RobotModel,
    state: RobotState,
    horizon: HorizonSpec | float,
    frame: Optional[int] = None,
    local_point: Optional[Sequence[float]] = None,
    dims: Sequence[int] = (0, 1, 2),
    velocity_limits: bool = True,
    position_limits: bool = True,
) -> ProjectionProblem:
    """
    Linearise the horizon motion of one point of the robot

    Args:
        model: Robot model
        state: Joint state at the start of the horizon (must be within limits)
        horizon: Horizon length (HorizonSpec or seconds)
        frame: Joint index carrying the point (default: last)
        local_point: Point in that joint frame (default: model end effector)
        dims: Task-space coordinates kept, (0, 1) for planar robots
        velocity_limits: Add the end-of-horizon joint velocity rows
        position_limits: Add the end-of-horizon joint position rows

    Returns:
        ProjectionProblem with the torque box first, then velocity, then position rows
    """
    t_h = horizon.t_h if isinstance(horizon, HorizonSpec) else HorizonSpec(float(horizon)).t_h
    dims = tuple(int(d) for d in dims)
    if len(dims) not in (2, 3) or any(d not in (0, 1, 2) for d in dims) or len(set(dims)) != len(dims):
        raise DimensionMismatchError(f"dims must pick 2 or 3 distinct coordinates of x, y, z, got {dims}")
    state.check_within(model)
    frame, point = resolve_frame(model, frame, local_point)

    pose = chain_pose(model, state.q)
    M, tau_d = dynamics_terms(model, pose, state.qd)
    J = pose_jacobian(model, pose, frame, point)
    bias = pose_jdot_qdot(pose, state.qd, frame, point)
    x_k = point_at(pose, frame, point)
    xd_k = J @ state.qd

    n = model.n
    half = 0.5 * t_h * t_h
    M_inv = solve_mass(M, np.eye(n))
    M_inv_tau_d = M_inv @ tau_d

    P_full = J @ M_inv * half
    x_star_full = x_k + xd_k * t_h + (bias - J @ M_inv_tau_d) * half

    eye = np.eye(n)
    blocks = [eye, -eye]
    offsets = [model.tau_max, -model.tau_min]
    if velocity_limits:
        V = M_inv * t_h
        shift = M_inv_tau_d * t_h - state.qd
        blocks += [V, -V]
        offsets += [model.qd_max + shift, -(model.qd_min + shift)]
    if position_limits:
        Q = M_inv * half
        shift = M_inv_tau_d * half - state.q - state.qd * t_h
        blocks += [Q, -Q]
        offsets += [model.q_max + shift, -(model.q_min + shift)]

    A = np.vstack(blocks)
    b = np.concatenate(offsets)
    idx = list(dims)
    problem = ProjectionProblem(
        P=P_full[idx],
        x_star=x_star_full[idx],
        A=A,
        b=b,
        n_torque_rows=A.shape[0],
        tau_d=tau_d,
        x_k=x_k[idx],
        xd_k=xd_k[idx],
        t_h=t_h,
        dims=dims,
    )
    logger.debug(f"Projection for {model.name} frame {frame}: t_h={t_h}, {A.shape[0]} rows, m={problem.m}")
    return problem


def add_environment(problem: ProjectionProblem, env: EnvironmentConstraints) -> ProjectionProblem:
    """Append A_e·x ≤ b_e as torque rows A_e·P·τ ≤ b_e − A_e·x*"""
    if env.rows == 0:
        return problem
    if env.A_e.shape[1] != problem.m:
        raise DimensionMismatchError(
            f"environment has {env.A_e.shape[1]} columns but the problem has m={problem.m}"
        )
    return ProjectionProblem(
        P=problem.P,
        x_star=problem.x_star,
        A=np.vstack([problem.A, env.A_e @ problem.P]),
        b=np.concatenate([problem.b, env.b_e - env.A_e @ problem.x_star]),
        n_torque_rows=problem.n_torque_rows,
        tau_d=problem.tau_d,
        x_k=problem.x_k,
        xd_k=problem.xd_k,
        t_h=problem.t_h,
        dims=problem.dims,
        meta=dict(problem.meta),
    )


@dataclass(frozen=True, eq=False)
class Feasibility:
    feasible: bool
    witness: Optional[np.ndarray] = None


def check_feasibility(problem: ProjectionProblem, backend: Optional[str] = None) -> Feasibility:
    """
    Find one τ with A·τ ≤ b

    τ_d is tried first; otherwise a phase-one LP decides. Infeasibility is a result,
    not an error.
    """
    from reachspan.polytope.lp import LPStatus, solve_lp

    if problem.satisfied(problem.tau_d):
        return Feasibility(True, np.array(problem.tau_d))
    result = solve_lp(np.zeros(problem.n), problem.A, problem.b, backend=backend)
    if result.status is LPStatus.OPTIMAL:
        return Feasibility(True, result.x)
    logger.debug(f"Projection problem infeasible ({result.status.value})")
    return Feasibility(False)
