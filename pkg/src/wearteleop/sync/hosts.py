"""State machines for the two hosts.

Host 1 turns armband data into POSE_INC and GRIP messages. Host 2 checks for
messages at 250 Hz and commands the robot at 1000 Hz. Every POSE_INC is
integrated at most once: between messages the control loop re-commands the
held target pose instead of re-applying the last increment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from ..config import RunConfig
from ..errors import DecodeError, ModelNotLoaded, NonUnitQuaternion, NotCalibrated, ValidationError
from ..kinematics import ArmModel, ImuSample, PoseIncrement, pose_increment, wrist_position
from ..semg import OPEN, Debouncer, FeatureConfig, GripCommand, LogisticModel, StreamingWindower, build_feature_vector, decide, predict_prob
from ..smoothing import IncrementSmoother, RobotPose, SmootherConfig, apply_pose_update
from .wire import Kind, WireMessage, decode_message

EventSink = Callable[..., None]


def _no_events(t_us, kind, **fields):
    pass


class Host1:
    """Master side: kinematics at the IMU rate, grasp recognition at the sEMG rate."""

    def __init__(self, arm: ArmModel, model: LogisticModel | None = None, config: RunConfig | None = None, emit: EventSink = _no_events):
        config = config or RunConfig()
        self.arm = arm
        self.model = model
        self.emit = emit
        self.windower = StreamingWindower(FeatureConfig(config.window_len, config.hop))
        self.debouncer = Debouncer(config.debounce)
        self.prev = None  # (p, q_forearm) of the last accepted sample
        self.imu_faults = 0
        self.wrist = []  # (t_us, p) per accepted sample

    def imu_step(self, sample: ImuSample) -> WireMessage | None:
        """Process one IMU sample; the first one only seeds the previous pose."""
        try:
            p = wrist_position(self.arm, sample)
        except NonUnitQuaternion as exc:
            self.imu_faults += 1
            self.emit(sample.t_us, "imu_fault", error=str(exc))
            return None
        curr = (p, sample.q_forearm)
        self.wrist.append((sample.t_us, p))
        prev, self.prev = self.prev, curr
        if prev is None:
            return None
        return WireMessage.from_increment(pose_increment(prev, curr, sample.t_us))

    def semg_step(self, window, t_us: int) -> WireMessage | None:
        """Classify one full window; emit GRIP only when the debounced state changes."""
        if self.model is None:
            raise ModelNotLoaded("no grasp model loaded")
        d = decide(predict_prob(self.model, build_feature_vector(window)))
        changed = self.debouncer.update(d)
        if changed is None:
            return None
        self.emit(t_us, "grip_decision", state=changed)
        return WireMessage(Kind.GRIP, t_us, (changed,))

    def semg_frame(self, frame, t_us: int) -> WireMessage | None:
        window = self.windower.push(frame)
        if window is None:
            return None
        return self.semg_step(window, t_us)


@dataclass
class SyncState:
    latest_increment: PoseIncrement | None = None
    latest_grip: GripCommand | None = None
    target_pose: RobotPose | None = None
    last_update_us: int = 0
    stale: bool = False

    @property
    def calibrated(self) -> bool:
        return self.target_pose is not None

    @property
    def grip(self) -> int:
        return OPEN if self.latest_grip is None else self.latest_grip.state


@dataclass
class Host2Stats:
    received: int = 0
    received_grip: int = 0
    superseded: int = 0
    late_discarded: int = 0
    decode_errors: int = 0
    integrations: int = 0
    clamped_increments: int = 0
    clamped_poses: int = 0
    control_cycles: int = 0
    stale_cycles: int = 0
    max_staleness_us: int = 0
    calibrations: int = 0
    error_kinds: dict = field(default_factory=dict)


class Host2:
    """Slave side: newest-wins message checking and consume-once pose integration."""

    def __init__(self, config: RunConfig | None = None, emit: EventSink = _no_events):
        self.config = config or RunConfig()
        self.emit = emit
        self.state = SyncState()
        self.smoother = IncrementSmoother(SmootherConfig(self.config.smoothing_window))
        self.stats = Host2Stats()
        self._consumed_t_us = -1
        self._calib_p = None
        self._disconnected = False

    def calibrate(self, pose: RobotPose, t_us: int) -> None:
        """Set the initial robot pose and restart the increment chain."""
        self.state.target_pose = pose
        self.state.latest_increment = None
        self.state.last_update_us = t_us
        self.smoother.reset()
        self._consumed_t_us = t_us
        self._calib_p = pose.position
        self.stats.calibrations += 1
        self.emit(t_us, "calibrate", p=list(pose.p), q=pose.q.to_array().tolist())

    def mark_disconnected(self, t_us: int) -> None:
        self._disconnected = True
        self.state.stale = True
        self.emit(t_us, "peer_disconnected")

    def receive_step(self, frames: Iterable[bytes], now_us: int) -> SyncState:
        """Drain all queued frames; keep only the newest POSE_INC and GRIP."""
        st = self.state
        newest: PoseIncrement | None = None
        for frame in frames:
            try:
                msg = decode_message(frame)
                if msg.kind is Kind.POSE_INC:
                    item = msg.to_increment()
                elif msg.kind is Kind.GRIP:
                    item = msg.to_grip()
                else:
                    item = msg.to_pose()
            except (DecodeError, ValidationError) as exc:
                self.stats.decode_errors += 1
                name = type(exc).__name__
                self.stats.error_kinds[name] = self.stats.error_kinds.get(name, 0) + 1
                self.emit(now_us, "decode_error", error=name)
                continue
            st.last_update_us = now_us
            self.emit(now_us, "recv", msg=msg.kind.name, msg_t_us=msg.t_us)
            if msg.kind is Kind.POSE_INC:
                self.stats.received += 1
                if newest is None or item.t_us > newest.t_us:
                    if newest is not None:
                        self.stats.superseded += 1
                    newest = item
                else:
                    self.stats.superseded += 1
            elif msg.kind is Kind.GRIP:
                self.stats.received_grip += 1
                if st.latest_grip is None or item.t_us >= st.latest_grip.t_us:
                    st.latest_grip = item
            else:
                self.calibrate(item, msg.t_us)
                st.last_update_us = now_us
        if newest is not None:
            if newest.t_us <= self._consumed_t_us:
                self.stats.late_discarded += 1
            else:
                if st.latest_increment is not None and st.latest_increment.t_us > self._consumed_t_us:
                    self.stats.superseded += 1
                st.latest_increment = newest
        return st

    def control_step(self, now_us: int) -> RobotPose:
        """One control cycle: integrate a fresh increment once, otherwise hold."""
        st = self.state
        if not st.calibrated:
            raise NotCalibrated("host 2 has no calibration pose")
        cfg = self.config
        self.stats.control_cycles += 1
        inc = st.latest_increment
        if inc is not None and inc.t_us > self._consumed_t_us:
            self._consumed_t_us = inc.t_us
            dp = np.asarray(inc.dp)
            norm = float(np.linalg.norm(dp))
            if norm > cfg.d_max:
                dp = dp * (cfg.d_max / norm)
                inc = PoseIncrement(inc.t_us, tuple(dp), inc.dq)
                self.stats.clamped_increments += 1
            dp_avg, dq_avg = self.smoother.push(inc)
            pose = apply_pose_update(st.target_pose, dp_avg, dq_avg)
            lo, hi = self._calib_p - cfg.workspace_half, self._calib_p + cfg.workspace_half
            p = np.clip(pose.position, lo, hi)
            if np.any(p != pose.position):
                self.stats.clamped_poses += 1
                pose = RobotPose.make(p, pose.q)
            st.target_pose = pose
            self.stats.integrations += 1

        staleness = now_us - st.last_update_us
        stale = self._disconnected or staleness > cfg.staleness_us
        if stale != st.stale:
            self.emit(now_us, "stale" if stale else "fresh", staleness_us=int(staleness))
        st.stale = stale
        if stale:
            self.stats.stale_cycles += 1
        self.stats.max_staleness_us = max(self.stats.max_staleness_us, int(staleness))
        return st.target_pose
