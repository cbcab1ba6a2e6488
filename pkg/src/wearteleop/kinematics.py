"""Incremental arm kinematics from two armband orientations.

The shoulder, inertial and manipulator-base frames are assumed to share the
same orientation, so wrist positions are used as robot-frame displacements
without any extra alignment. Human motion maps to the robot 1:1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .quaternion import Quaternion, as_quaternion, quat_inverse, quat_mul, quat_to_rotmat

DEFAULT_UPPER_ARM = 0.30
DEFAULT_FOREARM = 0.25


@dataclass(frozen=True)
class ArmModel:
    """Segment lengths of the operator's arm in metres."""

    l_upper: float = DEFAULT_UPPER_ARM
    l_forearm: float = DEFAULT_FOREARM

    def __post_init__(self):
        if not (self.l_upper > 0 and self.l_forearm > 0):
            raise ValidationError(f"arm segment lengths must be positive, got {self.l_upper}, {self.l_forearm}")

    @property
    def shoulder_to_elbow(self) -> np.ndarray:
        """Elbow position expressed in the elbow frame."""
        return np.array([self.l_upper, 0.0, 0.0])

    @property
    def elbow_to_wrist(self) -> np.ndarray:
        """Wrist position expressed in the wrist frame."""
        return np.array([self.l_forearm, 0.0, 0.0])

    @property
    def reach(self) -> float:
        return self.l_upper + self.l_forearm


@dataclass(frozen=True)
class ImuSample:
    t_us: int
    q_upper: Quaternion
    q_forearm: Quaternion


@dataclass(frozen=True)
class PoseIncrement:
    t_us: int
    dp: tuple[float, float, float]
    dq: Quaternion

    def __post_init__(self):
        if not np.all(np.isfinite(self.dp)):
            raise ValidationError(f"non-finite position increment {self.dp}")


def wrist_position(arm: ArmModel, sample: ImuSample) -> np.ndarray:
    """Wrist position relative to the shoulder, in the shoulder frame (m)."""
    r_upper = quat_to_rotmat(sample.q_upper)
    r_fore = quat_to_rotmat(sample.q_forearm)
    return r_upper @ arm.shoulder_to_elbow + r_fore @ arm.elbow_to_wrist


def pose_increment(prev, curr, t_us: int) -> PoseIncrement:
    """Position and orientation change between two ``(p, q)`` wrist poses.

    ``dq`` is ``q_curr ⊗ q_prev⁻¹``, so ``dq ⊗ q_prev == q_curr``.
    """
    p_prev, q_prev = prev
    p_curr, q_curr = curr
    dp = np.asarray(p_curr, dtype=float) - np.asarray(p_prev, dtype=float)
    dq = quat_mul(as_quaternion(q_curr), quat_inverse(q_prev))
    return PoseIncrement(int(t_us), (float(dp[0]), float(dp[1]), float(dp[2])), dq)
