"""Nonlinear rollouts used to check predicted polytopes against the real dynamics"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from reachspan.core.dynamics import chain_pose, dynamics_terms, point_at, resolve_frame, solve_mass
from reachspan.core.errors import MissingWitnessError, SimulationError
from reachspan.core.robot import RobotModel, RobotState
from reachspan.polytope.hull import Polytope

logger = logging.getLogger(__name__)

TORQUE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Rollout samples, the start state included as sample 0"""
    t: np.ndarray    # (N + 1,)
    q: np.ndarray    # (N + 1, n)
    qd: np.ndarray   # (N + 1, n)
    x: np.ndarray    # (N + 1, 3) world position of the tracked point

    @property
    def steps(self) -> int:
        return self.t.shape[0] - 1


def simulate(
    model: RobotModel,
    state: RobotState,
    tau,
    t_h: float,
    dt: float,
    frame: Optional[int] = None,
    local_point: Optional[Sequence[float]] = None,
) -> Trajectory:
    """
    Integrate the full dynamics under a constant torque

    Each step computes q̈ = M⁻¹(τ − τ_d), advances q̇ += q̈·dt and q += q̇_prev·dt + q̈·dt²/2,
    clamps q̇ to its box, and pins any joint that reaches a position limit with zero velocity.

    Args:
        model: Robot model
        state: Start state
        tau: Constant joint torque, within the torque limits
        t_h: Horizon in seconds (≥ dt)
        dt: Step in seconds (> 0)
        frame: Joint index of the tracked point (default last)
        local_point: Tracked point in that frame (default end effector)

    Returns:
        Trajectory with N = round(t_h / dt) steps
    """
    if not dt > 0:
        raise SimulationError(f"dt must be positive, got {dt}")
    if t_h < dt:
        raise SimulationError(f"horizon {t_h} is shorter than the step {dt}")
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (model.n,):
        raise SimulationError(f"torque has shape {tau.shape}, expected ({model.n},)")
    outside = np.flatnonzero((tau < model.tau_min - TORQUE_TOL) | (tau > model.tau_max + TORQUE_TOL))
    if outside.size:
        i = int(outside[0])
        raise SimulationError(f"joint {i + 1} (index {i}): torque {tau[i]:.6g} outside its limits")
    frame, point = resolve_frame(model, frame, local_point)

    steps = int(round(t_h / dt))
    n = model.n
    times = np.arange(steps + 1) * dt
    qs = np.empty((steps + 1, n))
    qds = np.empty((steps + 1, n))
    xs = np.empty((steps + 1, 3))

    q = np.array(state.q, dtype=float)
    qd = np.array(state.qd, dtype=float)
    pose = chain_pose(model, q)
    qs[0], qds[0], xs[0] = q, qd, point_at(pose, frame, point)

    for k in range(1, steps + 1):
        M, tau_d = dynamics_terms(model, pose, qd)
        qdd = solve_mass(M, tau - tau_d)
        q = q + qd * dt + 0.5 * qdd * dt * dt
        qd = np.clip(qd + qdd * dt, model.qd_min, model.qd_max)

        pinned = (q < model.q_min) | (q > model.q_max)
        if pinned.any():
            q = np.clip(q, model.q_min, model.q_max)
            qd[pinned] = 0.0

        pose = chain_pose(model, q)
        qs[k], qds[k], xs[k] = q, qd, point_at(pose, frame, point)

    return Trajectory(times, qs, qds, xs)


def write_trajectory_csv(trajectory: Trajectory, dims: Sequence[int] = (0, 1, 2)) -> str:
    """CSV with columns t, q1..qn, qd1..qdn and the tracked coordinates"""
    n = trajectory.q.shape[1]
    axes = "xyz"
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["t"] + [f"q{i + 1}" for i in range(n)] + [f"qd{i + 1}" for i in range(n)] + [axes[d] for d in dims]
    )
    for t, q, qd, x in zip(trajectory.t, trajectory.q, trajectory.qd, trajectory.x):
        writer.writerow([repr(float(t))] + [repr(float(v)) for v in q] + [repr(float(v)) for v in qd]
                        + [repr(float(x[d])) for d in dims])
    return buffer.getvalue()


@dataclass(frozen=True, eq=False)
class ReachedSet:
    """Simulated end-effector samples grouped by the vertex torque that produced them"""
    points: np.ndarray        # (N * n_v, m)
    vertex_index: np.ndarray  # (N * n_v,)
    steps: int
    n_vertices: int

    def of_vertex(self, i: int) -> np.ndarray:
        return self.points[self.vertex_index == i]


def collect_reached(
    model: RobotModel,
    state: RobotState,
    poly: Polytope,
    t_h: float,
    dt: float,
    frame: Optional[int] = None,
    local_point: Optional[Sequence[float]] = None,
    dims: Sequence[int] = (0, 1, 2),
) -> ReachedSet:
    """
    Roll out every vertex torque of a polytope over the horizon

    The N post-step samples of each rollout are kept; the shared start sample is not.
    """
    if poly.generators is None or poly.generators.shape[0] != poly.vertices.shape[0]:
        raise MissingWitnessError("polytope has no generator torque for its vertices")
    # LP optima sit on the torque limits up to round-off
    torques = np.clip(poly.generators, model.tau_min, model.tau_max)

    idx = list(dims)
    chunks, owners = [], []
    steps = 0
    for i, tau in enumerate(torques):
        trajectory = simulate(model, state, tau, t_h, dt, frame=frame, local_point=local_point)
        steps = trajectory.steps
        chunks.append(trajectory.x[1:, idx])
        owners.append(np.full(steps, i))

    if not chunks:
        return ReachedSet(np.zeros((0, len(idx))), np.zeros(0, dtype=int), 0, 0)
    logger.debug(f"Collected {len(chunks)} rollouts of {steps} steps at t_h={t_h}")
    return ReachedSet(np.vstack(chunks), np.concatenate(owners), steps, len(chunks))
