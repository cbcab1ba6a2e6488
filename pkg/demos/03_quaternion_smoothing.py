"""Sliding-window smoothing of pose increments.

Position increments are averaged over the last N = 10. Orientation
increments are averaged by sign-aligning them, stacking them into a 4xN
matrix and taking its principal singular direction; for tight windows that
agrees with the normalized mean.
"""

import numpy as np

from wearteleop import Quaternion, avg_position, avg_quaternion
from wearteleop.quaternion import rotation_angle
from wearteleop.smoothing import IncrementSmoother, RobotPose, apply_pose_update
from wearteleop.kinematics import PoseIncrement

print("mean of dp_x = 1..10:", avg_position([[k, 0, 0] for k in range(1, 11)]))

window = [Quaternion.from_axis_angle([0, 0, 1], np.radians(d)) for d in range(1, 11)]
print(f"average of 1..10 deg about z: {np.degrees(rotation_angle(avg_quaternion(window))):.4f} deg")

# q and -q are the same rotation; the result takes the sign of the newest element (-q here)
q = Quaternion.from_axis_angle([1, 1, 0], 0.8)
mixed = avg_quaternion([q, -q, q, -q])
print(f"q and -q mixed in one window: |dot with q| = {abs(mixed.dot(q)):.15f}, dot with newest = {mixed.dot(-q):.3f}")

# The smoother warms up over the first increments and then slides.
smoother = IncrementSmoother()
pose = RobotPose.make([0.4, 0.0, 0.3])
for k in range(15):
    dp, dq = smoother.push(PoseIncrement(k, (0.002 * k, 0.0, 0.0), Quaternion.identity()))
    pose = apply_pose_update(pose, dp, dq)
    if k in (0, 1, 9, 14):
        print(f"after increment {k:2d}: dp_avg_x = {dp[0] * 1000:.1f} mm, robot x = {pose.p[0]:.4f} m")
