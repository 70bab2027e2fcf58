import math

import numpy as np
import pytest

from reachspan.core.dynamics import (
    bias_torque,
    factor_mass_matrix,
    forward_dynamics,
    forward_kinematics,
    jacobian,
    jdot_qdot,
    kinetic_energy,
    mass_matrix,
)
from reachspan.core.errors import FrameIndexError, SingularMassMatrixError


def _random_state(model, rng):
    q = rng.uniform(model.q_min, model.q_max)
    qd = rng.uniform(model.qd_min, model.qd_max) * 0.5
    return q, qd


def test_planar_forward_kinematics(planar):
    x = forward_kinematics(planar, [math.pi / 2, -math.pi / 2])
    np.testing.assert_allclose(x, [1.0, 1.0, 0.0], atol=1e-12)


def test_elbow_frame_origin(planar):
    x = forward_kinematics(planar, [math.pi / 2, 0.3], frame=1)
    np.testing.assert_allclose(x, [0.0, 1.0, 0.0], atol=1e-12)


def test_generic7_figure_pose(generic7, figure_state):
    x = forward_kinematics(generic7, figure_state.q)
    # hand points forward and down from the bent elbow
    assert x[0] == pytest.approx(0.615, abs=0.01)
    assert x[1] == pytest.approx(0.0, abs=1e-9)
    assert x[2] == pytest.approx(0.559, abs=0.01)


def test_frame_out_of_range(planar):
    with pytest.raises(FrameIndexError):
        forward_kinematics(planar, [0.0, 0.0], frame=2)


def test_planar_mass_matrix_closed_form(planar):
    q2 = 0.7
    M = mass_matrix(planar, [0.2, q2])
    c = math.cos(q2)
    expected = np.array([[3.0 + 2.0 * c, 1.0 + c], [1.0 + c, 1.0]])
    np.testing.assert_allclose(M, expected, atol=1e-12)


def test_pendulum_gravity(pendulum):
    # holding torque is -m g l cos(q); released from rest the link falls towards +q
    assert bias_torque(pendulum, [0.0], [0.0])[0] == pytest.approx(-9.81 * 0.5)
    assert bias_torque(pendulum, [math.pi / 3], [0.0])[0] == pytest.approx(-9.81 * 0.5 * 0.5)
    assert forward_dynamics(pendulum, [0.0], [0.0], [0.0])[0] == pytest.approx(9.81 / 0.5)


def test_planar_coriolis_closed_form(planar):
    q = np.array([0.1, math.pi / 2])
    qd = np.array([2.0, 0.0])
    # h = -m2 l1 l2 sin(q2); tau_d = [h(2 qd1 qd2 + qd2^2), -h qd1^2], gravity is out of plane
    np.testing.assert_allclose(bias_torque(planar, q, qd), [0.0, 4.0], atol=1e-12)


@pytest.mark.parametrize("fixture", ["planar2", "generic7"])
def test_mass_matrix_symmetric_positive_definite(fixture, rng, request):
    model = request.getfixturevalue(fixture)
    for _ in range(10):
        q, _ = _random_state(model, rng)
        M = mass_matrix(model, q)
        np.testing.assert_allclose(M, M.T, atol=1e-12)
        assert np.linalg.eigvalsh(M).min() > 0


def test_singular_mass_matrix():
    with pytest.raises(SingularMassMatrixError):
        factor_mass_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))


@pytest.mark.parametrize("fixture", ["planar2", "generic7"])
def test_jacobian_matches_finite_differences(fixture, rng, request):
    model = request.getfixturevalue(fixture)
    h = 1e-6
    for _ in range(5):
        q, _ = _random_state(model, rng)
        J = jacobian(model, q)
        numeric = np.empty_like(J)
        for i in range(model.n):
            step = np.zeros(model.n)
            step[i] = h
            numeric[:, i] = (forward_kinematics(model, q + step) - forward_kinematics(model, q - step)) / (2 * h)
        np.testing.assert_allclose(J, numeric, atol=1e-5)


def test_jdot_qdot_matches_finite_differences(generic7, rng):
    q, qd = _random_state(generic7, rng)
    h = 1e-6
    numeric = (jacobian(generic7, q + h * qd) - jacobian(generic7, q - h * qd)) / (2 * h) @ qd
    np.testing.assert_allclose(jdot_qdot(generic7, q, qd), numeric, atol=1e-5)


def test_forward_dynamics_inverts_bias(generic7, rng):
    for _ in range(5):
        q, qd = _random_state(generic7, rng)
        tau = bias_torque(generic7, q, qd)
        np.testing.assert_allclose(forward_dynamics(generic7, q, qd, tau), 0.0, atol=1e-9)


def test_forward_dynamics_residual(generic7, rng):
    q, qd = _random_state(generic7, rng)
    tau = rng.uniform(generic7.tau_min, generic7.tau_max)
    qdd = forward_dynamics(generic7, q, qd, tau)
    residual = mass_matrix(generic7, q) @ qdd + bias_torque(generic7, q, qd) - tau
    np.testing.assert_allclose(residual, 0.0, atol=1e-9)


def test_energy_conserved_without_gravity(planar):
    # horizontal arm: gravity does no work, so kinetic energy is conserved
    q = np.array([0.2, 0.9])
    qd = np.array([1.0, -0.5])
    start = kinetic_energy(planar, q, qd)
    dt = 1e-4

    def rates(q, qd):
        return qd, forward_dynamics(planar, q, qd, np.zeros(2))

    for _ in range(2000):
        k1 = rates(q, qd)
        k2 = rates(q + 0.5 * dt * k1[0], qd + 0.5 * dt * k1[1])
        k3 = rates(q + 0.5 * dt * k2[0], qd + 0.5 * dt * k2[1])
        k4 = rates(q + dt * k3[0], qd + dt * k3[1])
        q = q + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        qd = qd + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])

    assert kinetic_energy(planar, q, qd) == pytest.approx(start, rel=0.01)
