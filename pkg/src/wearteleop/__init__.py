"""Wearable-armband Cartesian teleoperation: kinematics, grasp recognition, smoothing and host sync."""

from .kinematics import ArmModel, ImuSample, PoseIncrement, pose_increment, wrist_position
from .quaternion import Quaternion, quat_inverse, quat_mul, quat_to_rotmat
from .smoothing import RobotPose, apply_pose_update, avg_position, avg_quaternion

__version__ = "0.1.0"

__all__ = [
    "ArmModel",
    "ImuSample",
    "PoseIncrement",
    "Quaternion",
    "RobotPose",
    "apply_pose_update",
    "avg_position",
    "avg_quaternion",
    "pose_increment",
    "quat_inverse",
    "quat_mul",
    "quat_to_rotmat",
    "wrist_position",
]
