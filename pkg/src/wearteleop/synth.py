"""Synthetic armband recordings: shape-tracing arm motion and sEMG streams.

Shapes are traced in a vertical X-Z plane of the shoulder frame at a fixed Y
offset. Arm orientations come from planar two-link inverse kinematics with
the elbow below the shoulder-wrist line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import UnreachablePath, ValidationError
from .io import read_jsonl, write_jsonl
from .kinematics import ArmModel, ImuSample
from .metrics import Trajectory
from .quaternion import Quaternion
from .semg import N_CHANNELS, SemgFrame

SHAPES = ("square", "triangle", "circle", "pentagram")
DEFAULT_SIZE = {"square": 0.30, "triangle": 0.30, "circle": 0.15, "pentagram": 0.15}
IMU_PERIOD_US = 20_000
SEMG_PERIOD_US = 5_000
EMG_AMPLITUDE = {"relaxed": 5.0, "contracted": 50.0}
# fixed per-channel gain so channels differ the way real electrodes do
_CHANNEL_GAIN = np.linspace(0.7, 1.3, N_CHANNELS)


@dataclass
class ShapeSpec:
    """A shape to trace with the wrist.

    ``size`` is the side length for square and triangle, the radius for the
    circle and the circumradius for the pentagram. ``plane_q`` rotates the
    X-Z drawing plane about ``origin``. The wrist holds still for ``dwell_s``
    before and after the traversal.
    """

    shape: str = "square"
    size: float | None = None
    origin: tuple[float, float, float] = (0.0, 0.35, 0.0)
    plane_q: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    duration_s: float = 10.0
    dwell_s: float = 0.5
    sigma_q: float = 0.0
    sigma_emg: float = 1.0
    seed: int = 0
    grip: list = field(default_factory=list)  # [(profile, seconds), ...]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValidationError(f"unknown shape {self.shape!r}; choose from {SHAPES}")
        if self.size is None:
            self.size = DEFAULT_SIZE[self.shape]
        if self.size < 0 or self.duration_s <= 0 or self.dwell_s < 0 or self.sigma_q < 0 or self.sigma_emg < 0:
            raise ValidationError("shape size, durations and noise levels must be non-negative (duration positive)")


@dataclass
class SensorLog:
    imu: list[ImuSample] = field(default_factory=list)
    emg: list[SemgFrame] = field(default_factory=list)

    def records(self) -> list[dict]:
        recs = []
        for s in self.imu:
            recs.append({"t_us": s.t_us, "dev": "upper", "q": s.q_upper.to_array().tolist()})
            recs.append({"t_us": s.t_us, "dev": "forearm", "q": s.q_forearm.to_array().tolist()})
        for f in self.emg:
            recs.append({"t_us": f.t_us, "dev": "forearm", "emg": list(f.ch)})
        recs.sort(key=lambda r: (r["t_us"], "emg" in r, r["dev"] != "upper"))
        return recs

    @classmethod
    def from_records(cls, records) -> SensorLog:
        """Rebuild a log; IMU samples are formed per timestamp from the latest quaternion of each armband."""
        by_t: dict[int, dict] = {}
        emg = []
        last_t = {}
        for i, r in enumerate(records):
            try:
                t, dev = int(r["t_us"]), r["dev"]
            except (KeyError, TypeError, ValueError):
                raise ValidationError(f"record {i}: needs t_us and dev") from None
            if dev not in ("upper", "forearm"):
                raise ValidationError(f"record {i}: unknown device {dev!r}")
            stream = (dev, "emg" in r)
            if t < last_t.get(stream, t):
                raise ValidationError(f"record {i}: timestamps for {dev} go backwards")
            last_t[stream] = t
            if "emg" in r:
                emg.append(SemgFrame(t, tuple(int(v) for v in r["emg"])))
            elif "q" in r:
                by_t.setdefault(t, {})[dev] = Quaternion.from_array(r["q"])
            else:
                raise ValidationError(f"record {i}: needs q or emg")
        imu = []
        latest: dict[str, Quaternion] = {}
        for t in sorted(by_t):
            latest.update(by_t[t])
            if "upper" in latest and "forearm" in latest:
                imu.append(ImuSample(t, latest["upper"], latest["forearm"]))
        return cls(imu, sorted(emg, key=lambda f: f.t_us))

    def write(self, path) -> None:
        write_jsonl(path, self.records())

    @classmethod
    def read(cls, path) -> SensorLog:
        return cls.from_records(read_jsonl(path))


def _polyline(vertices: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Points at arc-length fractions ``s`` in [0, 1] along a closed polygon."""
    pts = np.vstack([vertices, vertices[:1]])
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    total = seg.sum()
    if total == 0.0:
        return np.repeat(pts[:1], len(s), axis=0)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    d = np.clip(s, 0.0, 1.0) * total
    i = np.clip(np.searchsorted(cum, d, side="right") - 1, 0, len(seg) - 1)
    frac = (d - cum[i]) / np.where(seg[i] > 0, seg[i], 1.0)
    return pts[i] + frac[:, None] * (pts[i + 1] - pts[i])


def shape_outline(shape: str, size: float, s: np.ndarray) -> np.ndarray:
    """2-D points (u, v) of a shape centred on the origin at arc-length fractions ``s``."""
    s = np.asarray(s, dtype=float)
    if shape == "circle":
        a = 2 * np.pi * s
        return size * np.column_stack([np.cos(a), np.sin(a)])
    if shape == "square":
        h = size / 2
        verts = np.array([[-h, -h], [h, -h], [h, h], [-h, h]])
    elif shape == "triangle":
        r = size / np.sqrt(3.0)  # circumradius of an equilateral triangle
        a = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
        verts = r * np.column_stack([np.cos(a), np.sin(a)])
    elif shape == "pentagram":
        a = np.pi / 2 + 4 * np.pi * np.arange(5) / 5  # star polygon {5/2}
        verts = size * np.column_stack([np.cos(a), np.sin(a)])
    else:
        raise ValidationError(f"unknown shape {shape!r}")
    return _polyline(verts, s)


def wrist_path(spec: ShapeSpec, period_us: int = IMU_PERIOD_US) -> Trajectory:
    """Ground-truth wrist path in the shoulder frame, sampled every ``period_us``."""
    dt = period_us * 1e-6
    n_dwell = int(round(spec.dwell_s / dt))
    n_move = int(round(spec.duration_s / dt))
    s = np.concatenate([np.zeros(n_dwell), np.arange(n_move + 1) / n_move, np.ones(n_dwell)])
    uv = shape_outline(spec.shape, spec.size, s)
    plane = Rotation.from_quat(spec.plane_q, scalar_first=True).as_matrix()
    e_u, e_v = plane[:, 0], plane[:, 2]  # drawing axes: X and Z before rotation
    pos = np.asarray(spec.origin) + uv[:, :1] * e_u + uv[:, 1:] * e_v
    return Trajectory(np.arange(len(s), dtype=np.int64) * period_us, pos)


def arm_ik(arm: ArmModel, targets: np.ndarray, margin: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Elbow-down two-link IK.

    Returns ``(q_upper, q_forearm)`` as ``(n, 4)`` scalar-first arrays whose
    segment x-axes point from shoulder to elbow and elbow to wrist. Raises
    UnreachablePath when any target lies outside the annulus of reach
    shrunk by ``margin``.
    """
    p = np.asarray(targets, dtype=float).reshape(-1, 3)
    r = np.linalg.norm(p, axis=1)
    lu, lf = arm.l_upper, arm.l_forearm
    bad = (r < abs(lu - lf) + margin) | (r > lu + lf - margin)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise UnreachablePath(f"path point {p[i].tolist()} at distance {r[i]:.4f} m is outside the arm's reach")
    d = p / r[:, None]
    down = np.array([0.0, 0.0, -1.0])
    n = down - (d @ down)[:, None] * d
    nn = np.linalg.norm(n, axis=1)
    # wrist straight above or below the shoulder: bend the elbow toward -y instead
    alt = np.array([0.0, -1.0, 0.0])
    n = np.where((nn < 1e-9)[:, None], alt - (d @ alt)[:, None] * d, n)
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    cos_a = np.clip((lu * lu + r * r - lf * lf) / (2 * lu * r), -1.0, 1.0)
    sin_a = np.sqrt(1.0 - cos_a * cos_a)
    x_upper = cos_a[:, None] * d + sin_a[:, None] * n
    elbow = lu * x_upper
    x_fore = (p - elbow) / lf
    k = np.cross(d, n)  # arm-plane normal, shared by both segments

    def frames(x):
        y = np.cross(k, x)
        return Rotation.from_matrix(np.stack([x, y, k], axis=2)).as_quat(scalar_first=True)

    return _continuous(frames(x_upper)), _continuous(frames(x_fore))


def _continuous(q: np.ndarray) -> np.ndarray:
    q = q.copy()
    for i in range(1, len(q)):
        if q[i] @ q[i - 1] < 0:
            q[i] = -q[i]
    return q


def perturb(q: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Left-multiply each quaternion by a random rotation with per-axis std ``sigma`` (rad)."""
    if sigma == 0.0:
        return q
    noise = Rotation.from_rotvec(rng.normal(0.0, sigma, size=(len(q), 3)))
    out = (noise * Rotation.from_quat(q, scalar_first=True)).as_quat(scalar_first=True)
    out[np.einsum("ij,ij->i", out, q) < 0] *= -1
    return out


def gen_semg(profile: str, duration_s: float, sigma: float = 1.0, seed: int = 0, t0_us: int = 0, rng: np.random.Generator | None = None) -> list[SemgFrame]:
    """200 Hz, 8-channel zero-mean sEMG noise.

    Sample std is ``sigma * A * gain_i`` with A = 5 (relaxed) or 50
    (contracted) sensor units; values are rounded and clipped to int8 range.
    """
    if profile not in EMG_AMPLITUDE:
        raise ValidationError(f"unknown sEMG profile {profile!r}")
    if duration_s <= 0:
        raise ValidationError("sEMG duration must be positive")
    rng = rng if rng is not None else np.random.default_rng(seed)
    n = int(round(duration_s * 1e6 / SEMG_PERIOD_US))
    x = rng.normal(size=(n, N_CHANNELS)) * (sigma * EMG_AMPLITUDE[profile] * _CHANNEL_GAIN)
    x = np.clip(np.rint(x), -128, 127).astype(int)
    return [SemgFrame(t0_us + i * SEMG_PERIOD_US, tuple(int(v) for v in row)) for i, row in enumerate(x)]


def gen_semg_schedule(schedule, sigma: float = 1.0, seed: int = 0) -> list[SemgFrame]:
    """Concatenate sEMG segments given as ``[(profile, seconds), ...]``."""
    rng = np.random.default_rng(seed)
    frames: list[SemgFrame] = []
    t0 = 0
    for profile, seconds in schedule:
        seg = gen_semg(profile, float(seconds), sigma, t0_us=t0, rng=rng)
        frames += seg
        t0 = seg[-1].t_us + SEMG_PERIOD_US
    return frames


def semg_training_windows(n_per_class: int, window_len: int = 100, sigma: float = 1.0, seed: int = 0) -> list[tuple[np.ndarray, int]]:
    """Labelled raw windows, ``n_per_class`` relaxed (0) and contracted (1), interleaved."""
    rng = np.random.default_rng(seed)
    secs = n_per_class * window_len * SEMG_PERIOD_US * 1e-6
    out = []
    per_class = []
    for label, profile in ((0, "relaxed"), (1, "contracted")):
        frames = np.array([f.ch for f in gen_semg(profile, secs, sigma, rng=rng)])
        per_class.append([(frames[i * window_len : (i + 1) * window_len], label) for i in range(n_per_class)])
    for a, b in zip(*per_class):
        out += [a, b]
    return out


def gen_shape(spec: ShapeSpec, arm: ArmModel | None = None) -> tuple[SensorLog, Trajectory]:
    """Synthesize an armband log that traces ``spec`` and its ground-truth wrist path."""
    arm = arm or ArmModel()
    truth = wrist_path(spec)
    q_u, q_f = arm_ik(arm, truth.pos)
    rng = np.random.default_rng(spec.seed)
    q_u = perturb(q_u, spec.sigma_q, rng)
    q_f = perturb(q_f, spec.sigma_q, rng)
    imu = [ImuSample(int(t), Quaternion.from_array(a), Quaternion.from_array(b)) for t, a, b in zip(truth.t_us, q_u, q_f)]
    emg = gen_semg_schedule(spec.grip, spec.sigma_emg, spec.seed + 1) if spec.grip else []
    return SensorLog(imu, emg), truth
