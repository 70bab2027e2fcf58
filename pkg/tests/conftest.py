import math

import numpy as np
import pytest

from reachspan.core.robot import RobotState, load_robot_file, parse_robot

# initial pose used for the 7-DOF figures: elbow bent, wrist tipped down
FIGURE_POSE = [0.0, 0.0, 0.0, -math.pi / 2, 0.0, 3 * math.pi / 5, 0.0]


def joint(axis, xyz=(0.0, 0.0, 0.0), rpy=(0.0, 0.0, 0.0), mass=1.0, com=(0.0, 0.0, 0.0),
          inertia=(0.0,) * 6, tau=(-5.0, 5.0), qd=(-2.0, 2.0), q=(-2.8, 2.8)):
    return {
        "origin": {"xyz": list(xyz), "rpy": list(rpy)},
        "axis": list(axis),
        "mass": mass,
        "com": list(com),
        "inertia": list(inertia),
        "tau": list(tau),
        "qd": list(qd),
        "q": list(q),
    }


def pendulum_document(length=0.5, mass=1.0, tau=20.0):
    """One link swinging about world y, horizontal at q = 0"""
    return {
        "name": "pendulum",
        "gravity": [0.0, 0.0, -9.81],
        "joints": [
            joint((0.0, 1.0, 0.0), mass=mass, com=(length, 0.0, 0.0), tau=(-tau, tau), qd=(-5.0, 5.0), q=(-3.0, 3.0)),
        ],
        "end_effector": [length, 0.0, 0.0],
    }


def planar_document(l1=1.0, l2=1.0, m1=1.0, m2=1.0, tau=5.0):
    """2R arm in the horizontal plane with point masses at the link tips"""
    return {
        "name": "planar",
        "gravity": [0.0, 0.0, -9.81],
        "joints": [
            joint((0.0, 0.0, 1.0), mass=m1, com=(l1, 0.0, 0.0), tau=(-tau, tau)),
            joint((0.0, 0.0, 1.0), xyz=(l1, 0.0, 0.0), mass=m2, com=(l2, 0.0, 0.0), tau=(-tau, tau)),
        ],
        "end_effector": [l2, 0.0, 0.0],
        "cartesian_limits": {"xdd": [-10.0, 10.0], "xd": [-3.0, 3.0]},
    }


@pytest.fixture
def pendulum():
    return parse_robot(pendulum_document())


@pytest.fixture
def planar():
    return parse_robot(planar_document())


@pytest.fixture(scope="session")
def planar2():
    return load_robot_file("planar2")


@pytest.fixture(scope="session")
def generic7():
    return load_robot_file("generic7")


@pytest.fixture
def figure_state():
    return RobotState.at_rest(FIGURE_POSE)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
