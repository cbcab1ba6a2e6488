"""Live two-host run over TCP with wall-clock periodic threads.

Host 2 listens and Host 1 connects. Each periodic process runs in its own
thread and threads exchange only immutable values through queues. Host 2's
receive thread polls a non-blocking socket at 250 Hz and hands each cycle's
frames to the control thread, which owns all pose state and never touches
the network.
"""

from __future__ import annotations

import logging
import queue
import socket
import threading
import time
from dataclasses import asdict

import numpy as np

from ..config import RunConfig
from ..errors import ConnectFailed, ValidationError
from ..kinematics import ArmModel
from ..metrics import Trajectory
from ..semg import LogisticModel
from ..smoothing import RobotPose
from ..synth import SensorLog
from .hosts import Host1, Host2
from .sim import EventLog, SimResult, filtered_reference
from .wire import FrameReader, calibrate_message, frame_with_length

log = logging.getLogger(__name__)

_DISCONNECT = object()


def parse_addr(addr: str) -> tuple[str, int]:
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise ValidationError(f"address must look like HOST:PORT, got {addr!r}")
    return host or "127.0.0.1", int(port)


class _Clock:
    def __init__(self):
        self.t0 = time.monotonic_ns()

    def us(self) -> int:
        return (time.monotonic_ns() - self.t0) // 1000

    def sleep_until(self, t_us: int, stop: threading.Event) -> bool:
        """Sleep until session time ``t_us``; False if ``stop`` was set meanwhile."""
        delay = (t_us - self.us()) / 1e6
        if delay > 0:
            return not stop.wait(delay)
        return not stop.is_set()


def _periodic(clock: _Clock, period_us: int, stop: threading.Event, body) -> None:
    """Call ``body(tick_us)`` on a drift-free schedule; overrun ticks are skipped."""
    k = 0
    while clock.sleep_until(k * period_us, stop):
        if body(k * period_us) is False:
            return
        k = max(k + 1, clock.us() // period_us)


def connect_with_backoff(addr: tuple[str, int], timeout_s: float) -> socket.socket:
    deadline = time.monotonic() + timeout_s
    delay = 0.05
    while True:
        try:
            return socket.create_connection(addr, timeout=max(0.05, deadline - time.monotonic()))
        except OSError as exc:
            if time.monotonic() + delay > deadline:
                raise ConnectFailed(f"could not connect to {addr[0]}:{addr[1]} within {timeout_s} s ({exc})") from None
            time.sleep(delay)
            delay = min(delay * 2, 1.0)


def run_host1(
    addr: str,
    sensor_log: SensorLog,
    model: LogisticModel | None = None,
    config: RunConfig | None = None,
    connect_timeout_s: float = 10.0,
    abort_after_s: float | None = None,
) -> SimResult:
    """Replay ``sensor_log`` in real time and stream its messages to Host 2.

    ``abort_after_s`` closes the connection abruptly at that point, as if the
    process had been killed.
    """
    cfg = config or RunConfig()
    if not sensor_log.imu:
        raise ValidationError("sensor log has no IMU samples")
    arm = ArmModel(cfg.l_upper, cfg.l_forearm)
    imu_events, semg_events, net_events = EventLog(), EventLog(), EventLog()
    imu_host = Host1(arm, None, cfg, emit=imu_events)
    semg_host = Host1(arm, model, cfg, emit=semg_events)
    semg_enabled = model is not None and bool(sensor_log.emg)

    sock = connect_with_backoff(parse_addr(addr), connect_timeout_s)
    sock.settimeout(None)
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    clock = _Clock()
    t_base = min([sensor_log.imu[0].t_us] + ([sensor_log.emg[0].t_us] if semg_enabled else []))
    outbox: queue.Queue = queue.Queue()
    stop = threading.Event()
    sent = {"POSE_INC": 0, "GRIP": 0, "CALIBRATE": 0}
    status = {"disconnected": False, "aborted": False}

    outbox.put(("CALIBRATE", t_base, calibrate_message(RobotPose.make(cfg.calib_p, cfg.calib_q), t_base)))

    def replay(items, period_us, step):
        it = iter(items)
        pending = next(it, None)

        def body(tick):
            nonlocal pending
            while pending is not None and pending.t_us - t_base <= tick:
                msg = step(pending)
                if msg is not None:
                    outbox.put((msg.kind.name, msg.t_us, msg.encode()))
                pending = next(it, None)
            return pending is not None

        _periodic(clock, period_us, stop, body)

    def writer():
        while True:
            item = outbox.get()
            if item is None:
                return
            kind, t_us, frame = item
            try:
                sock.sendall(frame_with_length(frame))
            except OSError as exc:
                status["disconnected"] = True
                net_events(clock.us(), "peer_disconnected", error=type(exc).__name__)
                stop.set()
                return
            sent[kind] += 1

    threads = [threading.Thread(target=replay, args=(sensor_log.imu, cfg.imu_period_us, imu_host.imu_step), name="host1-imu")]
    if semg_enabled:
        threads.append(threading.Thread(target=replay, args=(sensor_log.emg, cfg.semg_period_us, lambda f: semg_host.semg_frame(f, f.t_us)), name="host1-semg"))
    w = threading.Thread(target=writer, name="host1-writer")
    w.start()
    for th in threads:
        th.start()
    if abort_after_s is not None:
        if not stop.wait(abort_after_s):
            status["aborted"] = True
            net_events(clock.us(), "abort")
            stop.set()
            sock.close()
    for th in threads:
        th.join()
    outbox.put(None)
    w.join()
    if not status["aborted"]:
        try:
            sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        sock.close()

    wrist_t = np.array([t for t, _ in imu_host.wrist], dtype=np.int64)
    wrist_p = np.array([p for _, p in imu_host.wrist]).reshape(-1, 3)
    calib_p = np.asarray(cfg.calib_p, dtype=float)
    human_raw = Trajectory(wrist_t, calib_p + wrist_p - wrist_p[0]) if len(wrist_p) else Trajectory([], [])
    human = filtered_reference(wrist_t, wrist_p, calib_p, cfg.smoothing_window) if len(wrist_p) else human_raw
    events = sorted(imu_events + semg_events + net_events, key=lambda e: e["t_us"])
    stats = {
        "role": "host1",
        "sent": sent,
        "host1": {"imu_faults": imu_host.imu_faults, "imu_samples": len(imu_host.wrist), "semg_enabled": semg_enabled},
        **status,
    }
    return SimResult(None, None, human, human_raw, events, stats)


def run_host2(
    addr: str,
    config: RunConfig | None = None,
    duration_s: float | None = None,
    accept_timeout_s: float = 10.0,
    linger_s: float = 0.3,
    ready: threading.Event | None = None,
) -> SimResult:
    """Accept one Host 1 connection and run the receive and control loops.

    The run ends after ``duration_s`` or ``linger_s`` after the peer
    disconnects, whichever comes first. On disconnect the last target pose is
    held and the stale flag is raised.
    """
    cfg = config or RunConfig()
    events = EventLog()
    host2 = Host2(cfg, emit=events)
    with socket.create_server(parse_addr(addr)) as server:
        server.settimeout(accept_timeout_s)
        if ready is not None:
            ready.set()
        try:
            conn, peer = server.accept()
        except socket.timeout:
            raise ConnectFailed(f"no Host 1 connected within {accept_timeout_s} s") from None
    clock = _Clock()
    conn.setblocking(False)
    inbox: queue.Queue = queue.Queue()
    stop = threading.Event()

    reader = FrameReader()

    def receive(tick):
        chunks = []
        while True:
            try:
                data = conn.recv(65536)
            except BlockingIOError:
                break
            except OSError:
                data = b""
            if not data:
                inbox.put((tick, tuple(reader.feed(b"".join(chunks))) if chunks else ()))
                inbox.put((tick, _DISCONNECT))
                return False
            chunks.append(data)
        if chunks:
            frames = reader.feed(b"".join(chunks))
            if frames:
                inbox.put((tick, tuple(frames)))
        return True

    cmd_t, cmd_p, cmd_q, cmd_grip = [], [], [], []
    status = {"disconnected_at_us": None}

    def control(tick):
        while True:
            try:
                t_rx, frames = inbox.get_nowait()
            except queue.Empty:
                break
            if frames is _DISCONNECT:
                host2.mark_disconnected(t_rx)
                status["disconnected_at_us"] = t_rx
            else:
                host2.receive_step(frames, t_rx)
        if host2.state.calibrated:
            pose = host2.control_step(tick)
            cmd_t.append(tick)
            cmd_p.append(pose.p)
            cmd_q.append(pose.q.to_array())
            cmd_grip.append(host2.state.grip)
        if duration_s is not None and tick >= duration_s * 1e6:
            return False
        d = status["disconnected_at_us"]
        if d is not None and tick - d >= linger_s * 1e6:
            return False
        return True

    rx = threading.Thread(target=_periodic, args=(clock, cfg.receive_period_us, stop, receive), name="host2-receive")
    rx.start()
    try:
        _periodic(clock, cfg.control_period_us, stop, control)
    finally:
        stop.set()
        rx.join()
        conn.close()

    if not host2.state.calibrated:
        log.warning("host 2 finished without receiving a calibration message")
    stats = {
        "role": "host2",
        "host2": asdict(host2.stats),
        "final_stale": host2.state.stale,
        "disconnected_at_us": status["disconnected_at_us"],
        "peer": f"{peer[0]}:{peer[1]}",
    }
    commanded = Trajectory(np.array(cmd_t, dtype=np.int64), np.array(cmd_p).reshape(-1, 3), np.array(cmd_q).reshape(-1, 4))
    return SimResult(commanded, np.array(cmd_grip, dtype=int), None, None, list(events), stats)


def run_live(role: str, addr: str, **kwargs) -> SimResult:
    """Run one side of a live session; ``role`` is ``"host1"`` or ``"host2"``."""
    if role == "host1":
        return run_host1(addr, **kwargs)
    if role == "host2":
        return run_host2(addr, **kwargs)
    raise ValidationError(f"role must be host1 or host2, got {role!r}")
