"""Unit quaternion algebra.

Quaternions are stored scalar first, ``(eta, eps_x, eps_y, eps_z)``, and
always represent rotations: every constructor normalizes inputs whose norm is
within ``NORM_TOL`` of one and rejects anything further away.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonUnitQuaternion

NORM_TOL = 1e-6


def _checked_unit(values) -> np.ndarray:
    a = np.asarray(values, dtype=float).reshape(4)
    if not np.all(np.isfinite(a)):
        raise NonUnitQuaternion(f"non-finite quaternion {a.tolist()}")
    n = float(np.sqrt(a @ a))
    if abs(n - 1.0) > NORM_TOL:
        raise NonUnitQuaternion(f"quaternion norm {n!r} deviates from 1 by more than {NORM_TOL}")
    return a / n


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion with scalar part ``eta`` and vector part ``eps``."""

    eta: float
    eps: tuple[float, float, float]

    def __post_init__(self):
        a = _checked_unit([self.eta, *self.eps])
        object.__setattr__(self, "eta", float(a[0]))
        object.__setattr__(self, "eps", (float(a[1]), float(a[2]), float(a[3])))

    @classmethod
    def from_array(cls, values: Sequence[float]) -> Quaternion:
        a = np.asarray(values, dtype=float).reshape(4)
        return cls(float(a[0]), (float(a[1]), float(a[2]), float(a[3])))

    @classmethod
    def identity(cls) -> Quaternion:
        return cls(1.0, (0.0, 0.0, 0.0))

    @classmethod
    def from_axis_angle(cls, axis: Sequence[float], angle: float) -> Quaternion:
        ax = np.asarray(axis, dtype=float)
        ax = ax / np.linalg.norm(ax)
        s = np.sin(angle / 2.0)
        return cls.from_array([np.cos(angle / 2.0), *(s * ax)])

    @classmethod
    def from_rotvec(cls, rotvec: Sequence[float]) -> Quaternion:
        v = np.asarray(rotvec, dtype=float)
        angle = float(np.linalg.norm(v))
        if angle == 0.0:
            return cls.identity()
        return cls.from_axis_angle(v / angle, angle)

    def to_array(self) -> np.ndarray:
        return np.array([self.eta, *self.eps])

    def __array__(self, dtype=None, copy=None):
        return self.to_array() if dtype is None else self.to_array().astype(dtype)

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.eta, (-self.eps[0], -self.eps[1], -self.eps[2]))

    def __matmul__(self, other: Quaternion) -> Quaternion:
        return quat_mul(self, other)

    def dot(self, other: Quaternion) -> float:
        return float(self.to_array() @ other.to_array())


def as_quaternion(q) -> Quaternion:
    if isinstance(q, Quaternion):
        return q
    return Quaternion.from_array(q)


def quat_to_rotmat(q) -> np.ndarray:
    """Rotation matrix of a unit quaternion.

    Raises NonUnitQuaternion when ``|q|`` is further than 1e-6 from one.
    """
    w, x, y, z = _checked_unit(np.asarray(q, dtype=float))
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def _hamilton(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_mul(a, b) -> Quaternion:
    """Hamilton product ``a ⊗ b``, renormalized.

    ``quat_to_rotmat(a ⊗ b) == quat_to_rotmat(a) @ quat_to_rotmat(b)``.
    """
    return Quaternion.from_array(_hamilton(_checked_unit(np.asarray(a, float)), _checked_unit(np.asarray(b, float))))


def quat_inverse(q) -> Quaternion:
    """Inverse of a unit quaternion, i.e. its conjugate."""
    w, x, y, z = _checked_unit(np.asarray(q, dtype=float))
    return Quaternion.from_array([w, -x, -y, -z])


def rotation_angle(q) -> float:
    """Rotation angle in radians, in ``[0, pi]``."""
    w = abs(float(_checked_unit(np.asarray(q, dtype=float))[0]))
    return 2.0 * float(np.arccos(min(1.0, w)))


def angle_between(a, b) -> float:
    """Angle of the relative rotation between two orientations (radians)."""
    d = abs(float(_checked_unit(np.asarray(a, float)) @ _checked_unit(np.asarray(b, float))))
    return 2.0 * float(np.arccos(min(1.0, d)))


def random_unit_quaternions(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` uniformly distributed unit quaternions as an ``(n, 4)`` array."""
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)
