import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from conftest import unit_quaternions
from wearteleop.errors import NonUnitQuaternion, ValidationError
from wearteleop.kinematics import ArmModel, ImuSample, pose_increment, wrist_position
from wearteleop.quaternion import Quaternion, quat_mul, random_unit_quaternions

ARM = ArmModel(0.3, 0.25)
I = Quaternion.identity()


def zrot(deg):
    return Quaternion.from_axis_angle([0, 0, 1], np.radians(deg))


def test_straight_arm():
    np.testing.assert_allclose(wrist_position(ARM, ImuSample(0, I, I)), [0.55, 0, 0], atol=1e-15)


def test_forearm_90_about_z():
    np.testing.assert_allclose(wrist_position(ARM, ImuSample(0, I, zrot(90))), [0.3, 0.25, 0], atol=1e-12)


def test_matches_scipy_composition(rng):
    qu = random_unit_quaternions(500, rng)
    qf = random_unit_quaternions(500, rng)
    ref = Rotation.from_quat(qu, scalar_first=True).apply([0.3, 0, 0]) + Rotation.from_quat(qf, scalar_first=True).apply([0.25, 0, 0])
    ours = np.array([wrist_position(ARM, ImuSample(0, Quaternion.from_array(a), Quaternion.from_array(b))) for a, b in zip(qu, qf)])
    np.testing.assert_allclose(ours, ref, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(unit_quaternions(), unit_quaternions())
def test_within_reach(qu, qf):
    assert np.linalg.norm(wrist_position(ARM, ImuSample(0, qu, qf))) <= ARM.reach + 1e-12


@settings(max_examples=200, deadline=None)
@given(unit_quaternions(), unit_quaternions(), st.lists(st.floats(-1, 1), min_size=3, max_size=3), st.floats(1e-6, 0.2))
def test_continuity(qu, qf, axis, delta):
    if np.linalg.norm(axis) < 1e-3:
        axis = [1.0, 0.0, 0.0]
    d = Quaternion.from_axis_angle(axis, delta)
    p0 = wrist_position(ARM, ImuSample(0, qu, qf))
    p1 = wrist_position(ARM, ImuSample(0, quat_mul(d, qu), qf))
    p2 = wrist_position(ARM, ImuSample(0, qu, quat_mul(d, qf)))
    assert np.linalg.norm(p1 - p0) <= ARM.reach * delta + 1e-12
    assert np.linalg.norm(p2 - p0) <= ARM.reach * delta + 1e-12


def test_increment_identical_poses():
    inc = pose_increment(([0.1, 0, 0], zrot(10)), ([0.1, 0, 0], zrot(10)), 7)
    assert inc.t_us == 7
    np.testing.assert_array_equal(inc.dp, [0, 0, 0])
    np.testing.assert_allclose(inc.dq.to_array(), [1, 0, 0, 0], atol=1e-15)


def test_increment_subtraction():
    inc = pose_increment(([0.1, 0, 0], I), ([0.12, 0.01, 0], I), 0)
    np.testing.assert_allclose(inc.dp, [0.02, 0.01, 0], atol=1e-15)


def test_increment_45_to_90():
    inc = pose_increment(([0, 0, 0], zrot(45)), ([0, 0, 0], zrot(90)), 0)
    np.testing.assert_allclose(inc.dq.to_array(), zrot(45).to_array(), atol=1e-12)
    np.testing.assert_allclose(quat_mul(inc.dq, zrot(45)).to_array(), zrot(90).to_array(), atol=1e-12)


def test_rejects_non_unit():
    with pytest.raises(NonUnitQuaternion):
        pose_increment(([0, 0, 0], [1.0, 0.1, 0, 0]), ([0, 0, 0], I), 0)


def test_arm_validation():
    with pytest.raises(ValidationError):
        ArmModel(0.0, 0.25)
