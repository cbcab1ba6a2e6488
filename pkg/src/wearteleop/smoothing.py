"""Sliding-window smoothing of pose increments and robot pose integration."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyWindow, ValidationError
from .kinematics import PoseIncrement
from .quaternion import Quaternion, as_quaternion, quat_mul

DEFAULT_WINDOW = 10
SPECTRAL_GAP_TOL = 1e-12


@dataclass(frozen=True)
class SmootherConfig:
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        if self.window < 1:
            raise ValidationError(f"smoothing window must be >= 1, got {self.window}")


@dataclass(frozen=True)
class RobotPose:
    p: tuple[float, float, float]
    q: Quaternion = field(default_factory=Quaternion.identity)

    @classmethod
    def make(cls, p, q=None) -> RobotPose:
        p = np.asarray(p, dtype=float).reshape(3)
        return cls((float(p[0]), float(p[1]), float(p[2])), Quaternion.identity() if q is None else as_quaternion(q))

    @property
    def position(self) -> np.ndarray:
        return np.array(self.p)


def avg_position(window) -> np.ndarray:
    """Component-wise mean of the position increments in ``window``.

    Accepts PoseIncrement objects or raw 3-vectors.
    """
    rows = [w.dp if isinstance(w, PoseIncrement) else w for w in window]
    if not rows:
        raise EmptyWindow("cannot average an empty window")
    return np.mean(np.asarray(rows, dtype=float).reshape(-1, 3), axis=0)


def _principal_quaternion(window) -> tuple[np.ndarray, bool]:
    qs = np.array([np.asarray(as_quaternion(q)) for q in window]).reshape(-1, 4)
    if len(qs) == 0:
        raise EmptyWindow("cannot average an empty window")
    newest = qs[-1]
    # q and -q are the same rotation; flip everything onto the first element's hemisphere
    signs = np.where(qs @ qs[0] < 0.0, -1.0, 1.0)
    m = (qs * signs[:, None]).T  # 4 x N, one column per quaternion
    evals, evecs = np.linalg.eigh(m @ m.T)
    sv = np.sqrt(np.clip(evals[::-1], 0.0, None))
    degenerate = bool(sv[0] - sv[1] < SPECTRAL_GAP_TOL)
    if degenerate:
        u = m.sum(axis=1)
        if np.linalg.norm(u) < SPECTRAL_GAP_TOL:
            u = newest.copy()
    else:
        u = evecs[:, -1]
    u = u / np.linalg.norm(u)
    if u @ newest < 0.0:
        u = -u
    return u, degenerate


def avg_quaternion(window, *, with_flag: bool = False):
    """Average orientation of a window of unit quaternions.

    The window is sign-aligned, stacked into a 4xN matrix ``M`` and the
    principal left singular vector of ``M`` is returned (computed as the top
    eigenvector of ``M Mᵀ``). The sign is chosen so the result has a
    non-negative dot product with the newest (last) window element.

    When the two leading singular values are closer than 1e-12 the principal
    direction is ambiguous; the normalized sign-aligned mean is returned
    instead and, with ``with_flag=True``, the flag in the returned
    ``(quaternion, degenerate)`` pair is set.
    """
    u, degenerate = _principal_quaternion(window)
    q = Quaternion.from_array(u)
    return (q, degenerate) if with_flag else q


def apply_pose_update(pose: RobotPose, dp_avg, dq_avg) -> RobotPose:
    """One integration step: ``p += dp_avg`` and ``q = dq_avg ⊗ q``."""
    p = pose.position + np.asarray(dp_avg, dtype=float).reshape(3)
    return RobotPose.make(p, quat_mul(as_quaternion(dq_avg), pose.q))


class IncrementSmoother:
    """Ring buffer over the most recent ``window`` pose increments.

    Until the buffer fills, averages run over what has arrived so far.
    """

    def __init__(self, config: SmootherConfig | None = None):
        self.config = config or SmootherConfig()
        self._buf: deque[PoseIncrement] = deque(maxlen=self.config.window)
        self.degenerate_count = 0

    def __len__(self):
        return len(self._buf)

    def reset(self):
        self._buf.clear()

    def push(self, inc: PoseIncrement) -> tuple[np.ndarray, Quaternion]:
        """Add an increment and return the smoothed ``(dp_avg, dq_avg)``."""
        self._buf.append(inc)
        dp = avg_position(self._buf)
        dq, degenerate = avg_quaternion([w.dq for w in self._buf], with_flag=True)
        self.degenerate_count += degenerate
        return dp, dq
