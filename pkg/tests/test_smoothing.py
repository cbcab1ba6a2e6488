import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import unit_quaternions
from wearteleop.errors import EmptyWindow, NonUnitQuaternion, ValidationError
from wearteleop.kinematics import ArmModel, ImuSample, PoseIncrement, pose_increment, wrist_position
from wearteleop.quaternion import Quaternion, angle_between, quat_mul, random_unit_quaternions, rotation_angle
from wearteleop.smoothing import (
    IncrementSmoother,
    RobotPose,
    SmootherConfig,
    apply_pose_update,
    avg_position,
    avg_quaternion,
)


def zrot(deg):
    return Quaternion.from_axis_angle([0, 0, 1], np.radians(deg))


def normalized_mean(qs):
    a = np.array([np.asarray(q) for q in qs])
    a[a @ a[0] < 0] *= -1
    m = a.mean(axis=0)
    return m / np.linalg.norm(m)


def test_avg_position_constant():
    np.testing.assert_allclose(avg_position([[0.1, -0.2, 0.3]] * 10), [0.1, -0.2, 0.3], atol=1e-15)


def test_avg_position_ramp():
    w = [[k, 0, 0] for k in range(1, 11)]
    np.testing.assert_allclose(avg_position(w), [5.5, 0, 0])


def test_avg_position_single_and_empty():
    np.testing.assert_array_equal(avg_position([[1, 2, 3]]), [1, 2, 3])
    with pytest.raises(EmptyWindow):
        avg_position([])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31))
def test_avg_position_linear(n, a, b, seed):
    r = np.random.default_rng(seed)
    w1, w2 = r.normal(size=(n, 3)), r.normal(size=(n, 3))
    np.testing.assert_allclose(avg_position(a * w1 + b * w2), a * avg_position(w1) + b * avg_position(w2), atol=1e-12)


def test_avg_quaternion_rank_one():
    q = Quaternion.from_axis_angle([1, 2, -1], 0.4)
    out = avg_quaternion([q] * 10)
    assert out.dot(q) >= 1 - 1e-12


def test_avg_quaternion_sign_alignment():
    q = Quaternion.from_axis_angle([0, 1, 0], 1.1)
    out = avg_quaternion([q, -q, q, -q, q])
    assert out.dot(q) >= 1 - 1e-12


def test_avg_quaternion_small_angles_about_z():
    w = [zrot(d) for d in range(1, 11)]
    out = avg_quaternion(w)
    assert np.degrees(rotation_angle(out)) == pytest.approx(5.5, abs=0.01)
    # cross-check: top eigenvector of sum q qT
    a = np.array([q.to_array() for q in w])
    evec = np.linalg.eigh(a.T @ a)[1][:, -1]
    assert abs(evec @ out.to_array()) >= 1 - 1e-12


def test_avg_quaternion_empty():
    with pytest.raises(EmptyWindow):
        avg_quaternion([])


def test_avg_quaternion_degenerate_flag():
    # two orthogonal quaternions give equal singular values
    out, flag = avg_quaternion([Quaternion.identity(), Quaternion.from_array([0, 1, 0, 0])], with_flag=True)
    assert flag
    np.testing.assert_allclose(out.to_array(), np.array([1, 1, 0, 0]) / np.sqrt(2), atol=1e-12)
    _, flag = avg_quaternion([zrot(1), zrot(2)], with_flag=True)
    assert not flag


@settings(max_examples=200, deadline=None)
@given(st.lists(unit_quaternions(), min_size=1, max_size=12))
def test_avg_quaternion_unit_and_faces_newest(window):
    out = avg_quaternion(window)
    assert abs(np.linalg.norm(out.to_array()) - 1) <= 1e-12
    assert out.dot(window[-1]) >= 0


@settings(max_examples=200, deadline=None)
@given(unit_quaternions(), st.integers(1, 12), st.integers(0, 2**31))
def test_avg_quaternion_matches_mean_for_tight_windows(center, n, seed):
    r = np.random.default_rng(seed)
    window = []
    while len(window) < n:
        v = r.normal(size=3)
        v *= r.uniform(0, np.radians(5)) / np.linalg.norm(v)  # pairwise within 10 degrees
        q = quat_mul(Quaternion.from_rotvec(v), center)
        window.append(-q if r.random() < 0.5 else q)
    out = avg_quaternion(window)
    assert np.degrees(angle_between(out, normalized_mean(window))) <= 0.05


def test_apply_pose_update_examples():
    pose = RobotPose.make([0.1, 0, 0])
    assert apply_pose_update(pose, [0, 0, 0], Quaternion.identity()) == pose
    np.testing.assert_allclose(apply_pose_update(pose, [0.01, 0, 0], Quaternion.identity()).p, [0.11, 0, 0])
    out = apply_pose_update(RobotPose.make([0, 0, 0]), [0, 0, 0], zrot(90))
    np.testing.assert_allclose(out.q.to_array(), zrot(90).to_array(), atol=1e-15)
    with pytest.raises(NonUnitQuaternion):
        apply_pose_update(pose, [0, 0, 0], [1.0, 0.5, 0, 0])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 200), st.floats(-0.01, 0.01), st.floats(0, 0.01))
def test_constant_increments_integrate_linearly(k, dx, delta):
    pose = RobotPose.make([0, 0, 0])
    dq = Quaternion.from_axis_angle([0, 0, 1], delta)
    for _ in range(k):
        pose = apply_pose_update(pose, [dx, 0, 0], dq)
    assert pose.p[0] == pytest.approx(k * dx, abs=1e-15 * k)
    assert rotation_angle(pose.q) == pytest.approx(k * delta, abs=1e-6 * k)


def test_smoother_warm_up_and_window():
    sm = IncrementSmoother(SmootherConfig(3))
    outs = [sm.push(PoseIncrement(i, (float(i), 0.0, 0.0), Quaternion.identity()))[0][0] for i in range(1, 6)]
    assert outs == [1.0, 1.5, 2.0, 3.0, 4.0]
    assert len(sm) == 3
    sm.reset()
    assert len(sm) == 0
    with pytest.raises(ValidationError):
        SmootherConfig(0)


def test_round_trip_n1_reconstructs_final_pose(rng):
    arm = ArmModel()
    qs = random_unit_quaternions(200, rng)
    samples = [ImuSample(i, Quaternion.from_array(qs[i]), Quaternion.from_array(qs[-1 - i])) for i in range(200)]
    poses = [(wrist_position(arm, s), s.q_forearm) for s in samples]
    sm = IncrementSmoother(SmootherConfig(1))
    robot = RobotPose.make(poses[0][0], poses[0][1])
    for prev, curr in zip(poses, poses[1:]):
        robot = apply_pose_update(robot, *sm.push(pose_increment(prev, curr, 0)))
    np.testing.assert_allclose(robot.p, poses[-1][0], atol=1e-6)
    assert angle_between(robot.q, poses[-1][1]) <= 1e-6
