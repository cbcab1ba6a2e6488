"""Wrist position and incremental kinematics from two armband orientations.

Each armband reports its orientation as a scalar-first unit quaternion. The
wrist sits at R(Q_upper)·[l_U,0,0] + R(Q_forearm)·[l_F,0,0] from the
shoulder, and consecutive samples turn into (dp, dq) increments that the
robot integrates.
"""

import numpy as np

from wearteleop import ArmModel, ImuSample, Quaternion, pose_increment, quat_to_rotmat, wrist_position

arm = ArmModel(l_upper=0.30, l_forearm=0.25)
straight = ImuSample(0, Quaternion.identity(), Quaternion.identity())
print("straight arm, wrist at", wrist_position(arm, straight))

elbow_90 = Quaternion.from_axis_angle([0, 0, 1], np.pi / 2)
print("rotation matrix of 90 deg about z:\n", np.round(quat_to_rotmat(elbow_90), 12))
bent = ImuSample(20_000, Quaternion.identity(), elbow_90)
print("forearm turned 90 deg, wrist at", np.round(wrist_position(arm, bent), 12))

# One IMU period later: how far did the wrist move, and how did the forearm turn?
inc = pose_increment((wrist_position(arm, straight), straight.q_forearm), (wrist_position(arm, bent), bent.q_forearm), bent.t_us)
print("increment dp =", np.round(inc.dp, 12), " dq =", np.round(inc.dq.to_array(), 6))

# Quaternions within 1e-6 of unit norm are accepted and normalized; others are rejected.
try:
    Quaternion(1.01, (0.0, 0.0, 0.0))
except ValueError as exc:
    print("rejected:", exc)
