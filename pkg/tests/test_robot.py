import json

import numpy as np
import pytest

from reachspan.core.dynamics import mass_matrix
from reachspan.core.errors import ModelValidationError, RobotDescriptionError, StateOutOfLimitsError
from reachspan.core.robot import RobotState, augment_payload, load_robot, load_robot_file, parse_robot
from tests.conftest import pendulum_document, planar_document


def test_bundled_planar2():
    model = load_robot_file("planar2")
    assert model.n == 2
    assert model.total_mass == pytest.approx(2.0)
    assert model.cartesian_limits is not None


def test_bundled_generic7():
    model = load_robot_file("generic7")
    assert model.n == 7
    np.testing.assert_allclose(model.gravity, [0.0, 0.0, -9.81])
    assert model.ee_frame == 6


def test_robot_from_path(tmp_path):
    path = tmp_path / "arm.json"
    path.write_text(json.dumps(planar_document()))
    assert load_robot_file(path).name == "planar"


def test_missing_robot_file():
    with pytest.raises(RobotDescriptionError, match="not found"):
        load_robot_file("no/such/robot.json")


def test_malformed_json_reports_position():
    with pytest.raises(RobotDescriptionError, match="line 1 column"):
        load_robot('{"name": "x", "joints": [}')


def test_missing_field_reports_path():
    document = planar_document()
    del document["joints"][0]["axis"]
    with pytest.raises(RobotDescriptionError, match=r"joints\.0\.axis"):
        parse_robot(document)


def test_empty_joint_list_rejected():
    document = planar_document()
    document["joints"] = []
    with pytest.raises(RobotDescriptionError):
        parse_robot(document)


def test_non_unit_axis():
    document = planar_document()
    document["joints"][1]["axis"] = [0.0, 0.0, 2.0]
    with pytest.raises(ModelValidationError, match="joint 2"):
        parse_robot(document)


@pytest.mark.parametrize("kind", ["tau", "qd", "q"])
def test_inverted_limits(kind):
    document = planar_document()
    document["joints"][0][kind] = [1.0, -1.0]
    with pytest.raises(ModelValidationError, match=f"{kind}_min < {kind}_max"):
        parse_robot(document)


def test_negative_mass():
    document = pendulum_document(mass=-1.0)
    with pytest.raises(ModelValidationError, match="mass"):
        parse_robot(document)


def test_inertia_must_be_psd():
    document = pendulum_document()
    document["joints"][0]["inertia"] = [1.0, -1.0, 1.0, 0.0, 0.0, 0.0]
    with pytest.raises(ModelValidationError, match="positive semi-definite"):
        parse_robot(document)


def test_model_is_immutable(planar):
    with pytest.raises(ValueError):
        planar.gravity[2] = 0.0


def test_state_limits(planar):
    RobotState.at_rest([0.1, -0.1]).check_within(planar)
    with pytest.raises(StateOutOfLimitsError, match="joint 2"):
        RobotState.at_rest([0.0, 3.0]).check_within(planar)
    with pytest.raises(StateOutOfLimitsError, match="qd"):
        RobotState(np.zeros(2), np.array([2.5, 0.0])).check_within(planar)


def test_payload_adds_mass_and_leaves_original(pendulum):
    heavier = augment_payload(pendulum, 2.0, com_offset=(0.5, 0.0, 0.0))
    assert heavier.total_mass == pytest.approx(3.0)
    assert pendulum.total_mass == pytest.approx(1.0)
    np.testing.assert_allclose(heavier.joints[-1].link_com, [0.5, 0.0, 0.0])
    # point masses at the same lever: inertia about the joint scales with mass
    assert mass_matrix(heavier, [0.0])[0, 0] == pytest.approx(3.0 * 0.25)


def test_payload_parallel_axis(pendulum):
    # 1 kg at 0.5 m and 1 kg at 1.0 m about the joint: 0.25 + 1.0
    model = augment_payload(pendulum, 1.0, com_offset=(1.0, 0.0, 0.0))
    np.testing.assert_allclose(model.joints[-1].link_com, [0.75, 0.0, 0.0])
    assert mass_matrix(model, [0.3])[0, 0] == pytest.approx(1.25)


def test_zero_payload_is_identity(generic7, figure_state):
    same = augment_payload(generic7, 0.0)
    np.testing.assert_allclose(mass_matrix(same, figure_state.q), mass_matrix(generic7, figure_state.q), atol=1e-12)


def test_payload_rejects_bad_input(pendulum):
    with pytest.raises(ModelValidationError):
        augment_payload(pendulum, -0.5)
    with pytest.raises(ModelValidationError):
        augment_payload(pendulum, 1.0, inertia=[-1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
