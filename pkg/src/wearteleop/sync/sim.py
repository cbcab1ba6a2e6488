"""Deterministic discrete-event run of both hosts on a virtual microsecond clock."""

from __future__ import annotations

import heapq
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ..config import ChannelModel, RunConfig
from ..errors import ScenarioInvalid
from ..io import dumps_jsonl
from ..kinematics import ArmModel
from ..metrics import Trajectory
from ..semg import LogisticModel
from ..smoothing import RobotPose
from ..synth import SensorLog
from .channel import SimChannel
from .hosts import Host1, Host2

# same-instant tie order follows the data flow
_PROCESS_ORDER = ("semg", "imu", "receive", "control")


@dataclass
class Scenario:
    log: SensorLog
    model: LogisticModel | None = None
    config: RunConfig = field(default_factory=RunConfig)
    channel: ChannelModel = field(default_factory=ChannelModel)


@dataclass
class SimResult:
    """Outputs of one run. Live Host 1 runs have no commanded trajectory and
    live Host 2 runs have no human trajectory; those fields are None."""

    commanded: Trajectory | None
    grip: np.ndarray | None
    human: Trajectory | None
    human_raw: Trajectory | None
    events: list[dict]
    stats: dict

    def event_log(self) -> str:
        return dumps_jsonl(self.events)


class EventLog(list):
    def __call__(self, t_us, kind, **fields):
        self.append({"t_us": int(t_us), "kind": kind, **fields})


def filtered_reference(t_us, wrist, calib_p, window: int) -> Trajectory:
    """Robot positions an ideal transport would produce from a wrist stream.

    Position increments are averaged over the most recent ``window`` of them
    (fewer during warm-up) and accumulated onto ``calib_p``.
    """
    wrist = np.asarray(wrist, dtype=float).reshape(-1, 3)
    c = np.vstack([np.zeros(3), np.cumsum(np.diff(wrist, axis=0), axis=0)])
    k = np.arange(1, len(wrist))
    lo = np.maximum(0, k - window)
    avg = (c[k] - c[lo]) / (k - lo)[:, None]
    pos = np.asarray(calib_p, dtype=float) + np.vstack([np.zeros(3), np.cumsum(avg, axis=0)])
    return Trajectory(t_us, pos)


def _validate(scenario: Scenario):
    log = scenario.log
    if not log.imu:
        raise ScenarioInvalid("scenario has no IMU samples")
    for name, ts in (("imu", [s.t_us for s in log.imu]), ("emg", [f.t_us for f in log.emg])):
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise ScenarioInvalid(f"{name} timestamps are not monotone")
        if ts and ts[0] < 0:
            raise ScenarioInvalid(f"{name} timestamps must be non-negative")


def run_simulation(scenario: Scenario) -> SimResult:
    """Run Host 1, the channel and Host 2 to completion.

    The same scenario and channel seed always produce identical outputs.
    """
    _validate(scenario)
    cfg = scenario.config
    log = scenario.log
    events = EventLog()
    arm = ArmModel(cfg.l_upper, cfg.l_forearm)
    host1 = Host1(arm, scenario.model, cfg, emit=events)
    host2 = Host2(cfg, emit=events)
    channel = SimChannel(scenario.channel)
    semg_enabled = scenario.model is not None and bool(log.emg)

    t0 = min([log.imu[0].t_us] + ([log.emg[0].t_us] if semg_enabled else []))
    t_end = max([log.imu[-1].t_us] + ([log.emg[-1].t_us] if semg_enabled else [])) + cfg.tail_us
    calib = RobotPose.make(cfg.calib_p, cfg.calib_q)
    host2.calibrate(calib, t0)

    periods = {"semg": cfg.semg_period_us, "imu": cfg.imu_period_us, "receive": cfg.receive_period_us, "control": cfg.control_period_us}
    heap = [(t0, _PROCESS_ORDER.index(name), name) for name in _PROCESS_ORDER if name != "semg" or semg_enabled]
    heapq.heapify(heap)

    sent = {"POSE_INC": 0, "GRIP": 0}
    imu_i = emg_i = 0
    cmd_t, cmd_p, cmd_q, cmd_grip = [], [], [], []

    def send(msg, now):
        sent[msg.kind.name] += 1
        deliver = channel.send(msg.encode(), now)
        if deliver is None:
            events(now, "drop", msg=msg.kind.name, msg_t_us=msg.t_us)
        else:
            events(now, "send", msg=msg.kind.name, msg_t_us=msg.t_us, deliver_us=deliver)

    while heap:
        now, prio, name = heapq.heappop(heap)
        if name == "semg":
            while emg_i < len(log.emg) and log.emg[emg_i].t_us <= now:
                msg = host1.semg_frame(log.emg[emg_i], log.emg[emg_i].t_us)
                emg_i += 1
                if msg is not None:
                    send(msg, now)
        elif name == "imu":
            while imu_i < len(log.imu) and log.imu[imu_i].t_us <= now:
                msg = host1.imu_step(log.imu[imu_i])
                imu_i += 1
                if msg is not None:
                    send(msg, now)
        elif name == "receive":
            host2.receive_step(channel.poll(now), now)
        else:
            pose = host2.control_step(now)
            grip = host2.state.grip
            if cmd_grip and grip != cmd_grip[-1]:
                events(now, "grip_command", state=grip)
            cmd_t.append(now)
            cmd_p.append(pose.p)
            cmd_q.append(pose.q.to_array())
            cmd_grip.append(grip)
        nxt = now + periods[name]
        if nxt <= t_end:
            heapq.heappush(heap, (nxt, prio, name))

    wrist_t = np.array([t for t, _ in host1.wrist], dtype=np.int64)
    wrist_p = np.array([p for _, p in host1.wrist])
    calib_p = np.asarray(cfg.calib_p, dtype=float)
    human_raw = Trajectory(wrist_t, calib_p + wrist_p - wrist_p[0])
    human = filtered_reference(wrist_t, wrist_p, calib_p, cfg.smoothing_window)

    stats = {
        "sent": sent,
        "channel": {"sent": channel.sent, "dropped": channel.dropped, "corrupted": channel.corrupted, "delivered": channel.delivered, "in_flight": len(channel)},
        "host1": {"imu_faults": host1.imu_faults, "imu_samples": imu_i, "semg_frames": emg_i, "semg_enabled": semg_enabled},
        "host2": asdict(host2.stats),
        "smoother_degenerate": host2.smoother.degenerate_count,
        "final_stale": host2.state.stale,
        "t_start_us": int(t0),
        "t_end_us": int(cmd_t[-1]),
    }
    commanded = Trajectory(np.array(cmd_t, dtype=np.int64), np.array(cmd_p), np.array(cmd_q))
    return SimResult(commanded, np.array(cmd_grip, dtype=int), human, human_raw, list(events), json.loads(json.dumps(stats)))
