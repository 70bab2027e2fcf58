"""
Serial-chain kinematics and dynamics

All quantities are expressed in the world (base) frame. The mass matrix comes from
composite-rigid-body accumulation; bias torques and the Jacobian-velocity product
come from a recursive Newton-Euler pass with zero joint acceleration.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from reachspan.core.errors import FrameIndexError, SingularMassMatrixError
from reachspan.core.robot import RobotModel, parallel_axis


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis"""
    k = _skew(axis)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


@dataclass(frozen=True, eq=False)
class ChainPose:
    """World placement of every joint frame and link for one configuration"""
    rotations: np.ndarray   # (n, 3, 3) joint frame orientation after the joint rotation
    origins: np.ndarray     # (n, 3) joint frame origins
    axes: np.ndarray        # (n, 3) joint axes
    coms: np.ndarray        # (n, 3) link centres of mass
    inertias: np.ndarray    # (n, 3, 3) link inertia about the COM


def chain_pose(model: RobotModel, q: Sequence[float]) -> ChainPose:
    """Propagate the joint transforms from the base outwards"""
    q = np.asarray(q, dtype=float)
    if q.shape != (model.n,):
        raise ValueError(f"q must have length {model.n}, got shape {q.shape}")

    n = model.n
    rotations = np.empty((n, 3, 3))
    origins = np.empty((n, 3))
    axes = np.empty((n, 3))
    coms = np.empty((n, 3))
    inertias = np.empty((n, 3, 3))

    rotation = np.eye(3)
    position = np.zeros(3)
    for i, joint in enumerate(model.joints):
        position = position + rotation @ joint.origin_xyz
        rotation = rotation @ joint.origin_rotation
        axes[i] = rotation @ joint.axis
        rotation = rotation @ axis_rotation(joint.axis, q[i])
        rotations[i] = rotation
        origins[i] = position
        coms[i] = position + rotation @ joint.link_com
        inertias[i] = rotation @ joint.link_inertia @ rotation.T

    return ChainPose(rotations, origins, axes, coms, inertias)


def resolve_frame(model: RobotModel, frame: Optional[int], local_point) -> tuple[int, np.ndarray]:
    if frame is None:
        frame = model.ee_frame
        point = model.end_effector if local_point is None else local_point
    else:
        point = np.zeros(3) if local_point is None else local_point
    if not isinstance(frame, (int, np.integer)) or not 0 <= frame < model.n:
        raise FrameIndexError(f"frame index {frame} out of range for {model.n} joints")
    point = np.asarray(point, dtype=float)
    if point.shape != (3,):
        raise ValueError("local_point must be a 3-vector")
    return int(frame), point


def point_at(pose: ChainPose, frame: int, local_point: np.ndarray) -> np.ndarray:
    """World position of a point rigidly attached to the frame's link"""
    return pose.origins[frame] + pose.rotations[frame] @ local_point


def _motion(pose: ChainPose, qd: np.ndarray, base_acceleration: np.ndarray):
    """
    Forward Newton-Euler pass with zero joint acceleration

    Returns:
        Angular velocities, angular accelerations and joint-origin linear accelerations, each (n, 3)
    """
    n = pose.origins.shape[0]
    omega = np.empty((n, 3))
    alpha = np.empty((n, 3))
    accel = np.empty((n, 3))

    omega_prev = np.zeros(3)
    alpha_prev = np.zeros(3)
    accel_prev = np.asarray(base_acceleration, dtype=float)
    origin_prev = np.zeros(3)
    for i in range(n):
        r = pose.origins[i] - origin_prev
        accel[i] = accel_prev + np.cross(alpha_prev, r) + np.cross(omega_prev, np.cross(omega_prev, r))
        spin = pose.axes[i] * qd[i]
        omega[i] = omega_prev + spin
        alpha[i] = alpha_prev + np.cross(omega_prev, spin)
        omega_prev, alpha_prev, accel_prev, origin_prev = omega[i], alpha[i], accel[i], pose.origins[i]
    return omega, alpha, accel


def _bias(model: RobotModel, pose: ChainPose, qd: np.ndarray) -> np.ndarray:
    # gravity enters as a fictitious upward base acceleration
    omega, alpha, accel = _motion(pose, qd, -model.gravity)

    n = model.n
    tau = np.empty(n)
    force_next = np.zeros(3)
    moment_next = np.zeros(3)
    origin_next = np.zeros(3)
    for i in range(n - 1, -1, -1):
        mass = model.joints[i].link_mass
        lever = pose.coms[i] - pose.origins[i]
        com_accel = accel[i] + np.cross(alpha[i], lever) + np.cross(omega[i], np.cross(omega[i], lever))
        force = mass * com_accel
        inertia = pose.inertias[i]
        moment = inertia @ alpha[i] + np.cross(omega[i], inertia @ omega[i])

        force_i = force + force_next
        moment_i = moment + np.cross(lever, force) + moment_next + np.cross(origin_next - pose.origins[i], force_next)
        tau[i] = pose.axes[i] @ moment_i
        force_next, moment_next, origin_next = force_i, moment_i, pose.origins[i]
    return tau


def _composite_mass_matrix(model: RobotModel, pose: ChainPose) -> np.ndarray:
    n = model.n
    masses = np.array([j.link_mass for j in model.joints])

    # composite bodies K_i = links i..n-1: mass, COM and inertia about that COM
    comp_mass = np.empty(n)
    comp_com = np.empty((n, 3))
    comp_inertia = np.empty((n, 3, 3))
    for i in range(n - 1, -1, -1):
        if i == n - 1:
            comp_mass[i] = masses[i]
            comp_com[i] = pose.coms[i]
            comp_inertia[i] = pose.inertias[i]
            continue
        total = masses[i] + comp_mass[i + 1]
        if total > 0:
            com = (masses[i] * pose.coms[i] + comp_mass[i + 1] * comp_com[i + 1]) / total
        else:
            com = pose.coms[i]
        comp_mass[i] = total
        comp_com[i] = com
        comp_inertia[i] = (
            pose.inertias[i] + parallel_axis(masses[i], pose.coms[i] - com)
            + comp_inertia[i + 1] + parallel_axis(comp_mass[i + 1], comp_com[i + 1] - com)
        )

    M = np.zeros((n, n))
    for i in range(n):
        z = pose.axes[i]
        # wrench needed to spin K_i about joint i at unit rate, moments taken about each upstream joint
        force = comp_mass[i] * np.cross(z, comp_com[i] - pose.origins[i])
        moments = comp_inertia[i] @ z + np.cross(comp_com[i] - pose.origins[: i + 1], force)
        column = np.einsum("ij,ij->i", pose.axes[: i + 1], moments)
        M[: i + 1, i] = column
        M[i, : i + 1] = column
    return M


def forward_kinematics(model: RobotModel, q, frame: Optional[int] = None, local_point=None) -> np.ndarray:
    """
    World position of a point attached to a link

    Args:
        model: Robot model
        q: Joint positions
        frame: Joint index whose link carries the point (default: last joint)
        local_point: Point in that joint frame (default: the model's end-effector point)

    Returns:
        3-vector in metres
    """
    frame, point = resolve_frame(model, frame, local_point)
    return point_at(chain_pose(model, q), frame, point)


def jacobian(model: RobotModel, q, frame: Optional[int] = None, local_point=None) -> np.ndarray:
    """Positional 3 x n Jacobian of an attached point"""
    frame, point = resolve_frame(model, frame, local_point)
    pose = chain_pose(model, q)
    return pose_jacobian(model, pose, frame, point)


def pose_jacobian(model: RobotModel, pose: ChainPose, frame: int, point: np.ndarray) -> np.ndarray:
    p = point_at(pose, frame, point)
    J = np.zeros((3, model.n))
    J[:, : frame + 1] = np.cross(pose.axes[: frame + 1], p - pose.origins[: frame + 1]).T
    return J


def jdot_qdot(model: RobotModel, q, qd, frame: Optional[int] = None, local_point=None) -> np.ndarray:
    """Bias acceleration J̇q̇ of an attached point (its acceleration when q̈ = 0)"""
    frame, point = resolve_frame(model, frame, local_point)
    pose = chain_pose(model, q)
    return pose_jdot_qdot(pose, np.asarray(qd, dtype=float), frame, point)


def pose_jdot_qdot(pose: ChainPose, qd: np.ndarray, frame: int, point: np.ndarray) -> np.ndarray:
    omega, alpha, accel = _motion(pose, qd, np.zeros(3))
    lever = point_at(pose, frame, point) - pose.origins[frame]
    w = omega[frame]
    return accel[frame] + np.cross(alpha[frame], lever) + np.cross(w, np.cross(w, lever))


def mass_matrix(model: RobotModel, q) -> np.ndarray:
    """Joint-space mass matrix M(q)"""
    return _composite_mass_matrix(model, chain_pose(model, q))


def bias_torque(model: RobotModel, q, qd) -> np.ndarray:
    """τ_d = C(q, q̇)q̇ + τ_g(q), the torque that produces zero joint acceleration"""
    return _bias(model, chain_pose(model, q), np.asarray(qd, dtype=float))


def dynamics_terms(model: RobotModel, pose: ChainPose, qd) -> tuple[np.ndarray, np.ndarray]:
    """Mass matrix and bias torque sharing one kinematic pass"""
    return _composite_mass_matrix(model, pose), _bias(model, pose, np.asarray(qd, dtype=float))


def factor_mass_matrix(M: np.ndarray):
    """Cholesky factor of M, raising SingularMassMatrixError when M is not SPD"""
    try:
        return cho_factor(M)
    except LinAlgError as e:
        raise SingularMassMatrixError(f"mass matrix is not positive definite: {e}") from e


def solve_mass(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return cho_solve(factor_mass_matrix(M), rhs)


def forward_dynamics(model: RobotModel, q, qd, tau) -> np.ndarray:
    """q̈ = M(q)⁻¹ (τ − τ_d(q, q̇))"""
    M, tau_d = dynamics_terms(model, chain_pose(model, q), qd)
    return solve_mass(M, np.asarray(tau, dtype=float) - tau_d)


def kinetic_energy(model: RobotModel, q, qd) -> float:
    qd = np.asarray(qd, dtype=float)
    return 0.5 * float(qd @ mass_matrix(model, q) @ qd)
