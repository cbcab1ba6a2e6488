"""Trajectory comparison between the operator's wrist path and the robot's path."""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptyTrajectory, NoPairs, ValidationError
from .io import atomic_write_text, read_jsonl

AXES = ("X", "Y", "Z")
DEFAULT_PAIR_TOL_US = 2000
_COLUMNS = ("t_us", "x", "y", "z")
_QCOLUMNS = ("qw", "qx", "qy", "qz")


@dataclass
class Trajectory:
    """Time-stamped positions (m) with optional scalar-first orientations."""

    t_us: np.ndarray
    pos: np.ndarray
    quat: np.ndarray | None = None

    def __post_init__(self):
        self.t_us = np.asarray(self.t_us, dtype=np.int64).reshape(-1)
        self.pos = np.asarray(self.pos, dtype=float).reshape(-1, 3)
        if self.quat is not None:
            self.quat = np.asarray(self.quat, dtype=float).reshape(-1, 4)
            if len(self.quat) != len(self.t_us):
                raise ValidationError("quaternion column length differs from timestamps")
        if len(self.pos) != len(self.t_us):
            raise ValidationError("position column length differs from timestamps")
        if len(self.t_us) > 1 and np.any(np.diff(self.t_us) <= 0):
            raise ValidationError("trajectory timestamps must be strictly increasing")

    def __len__(self):
        return len(self.t_us)

    def after(self, t_us: int) -> Trajectory:
        keep = self.t_us >= t_us
        return Trajectory(self.t_us[keep], self.pos[keep], None if self.quat is None else self.quat[keep])

    def translated(self, offset) -> Trajectory:
        return Trajectory(self.t_us, self.pos + np.asarray(offset, dtype=float), self.quat)


@dataclass
class Pairs:
    a: np.ndarray  # (n, 3) positions from the first trajectory
    b: np.ndarray  # (n, 3) matched positions from the second
    unpaired: int

    def __len__(self):
        return len(self.a)


@dataclass
class MetricsReport:
    rmse: dict[str, float]
    mae: dict[str, float]
    paired: int
    unpaired: int

    def table(self) -> dict:
        return {ax: {"rmse": self.rmse[ax], "mae": self.mae[ax]} for ax in AXES}


def pair_trajectories(a: Trajectory, b: Trajectory, tol_us: int = DEFAULT_PAIR_TOL_US) -> Pairs:
    """Match each sample of ``a`` to the nearest-in-time sample of ``b``.

    Samples of ``a`` with no ``b`` sample within ``tol_us`` are counted as
    unpaired. Ties between two equally near ``b`` samples go to the earlier one.
    """
    if len(a) == 0 or len(b) == 0:
        raise EmptyTrajectory("cannot pair an empty trajectory")
    idx = np.searchsorted(b.t_us, a.t_us)
    left = np.clip(idx - 1, 0, len(b) - 1)
    right = np.clip(idx, 0, len(b) - 1)
    d_left = np.abs(a.t_us - b.t_us[left])
    d_right = np.abs(b.t_us[right] - a.t_us)
    nearest = np.where(d_left <= d_right, left, right)
    ok = np.abs(b.t_us[nearest] - a.t_us) <= tol_us
    return Pairs(a.pos[ok], b.pos[nearest[ok]], int(np.count_nonzero(~ok)))


def _axis_index(axis) -> int:
    if isinstance(axis, str):
        return AXES.index(axis.upper())
    return int(axis)


def rmse(pairs: Pairs, axis) -> float:
    if len(pairs) == 0:
        raise NoPairs("no paired samples")
    d = pairs.a[:, _axis_index(axis)] - pairs.b[:, _axis_index(axis)]
    return float(np.sqrt(np.mean(d * d)))


def mae(pairs: Pairs, axis) -> float:
    if len(pairs) == 0:
        raise NoPairs("no paired samples")
    d = pairs.a[:, _axis_index(axis)] - pairs.b[:, _axis_index(axis)]
    return float(np.mean(np.abs(d)))


def evaluate(human: Trajectory, robot: Trajectory, tol_us: int = DEFAULT_PAIR_TOL_US, skip_us: int | None = None) -> MetricsReport:
    """Per-axis RMSE and MAE of ``robot`` against ``human``.

    ``skip_us`` drops human samples before that timestamp (filter warm-up).
    """
    if skip_us is not None:
        human = human.after(skip_us)
    pairs = pair_trajectories(human, robot, tol_us)
    return MetricsReport(
        rmse={ax: rmse(pairs, ax) for ax in AXES},
        mae={ax: mae(pairs, ax) for ax in AXES},
        paired=len(pairs),
        unpaired=pairs.unpaired,
    )


def table_report(reports: dict[str, MetricsReport]) -> dict:
    """Nest reports as shape -> axis -> {rmse, mae}."""
    return {shape: r.table() for shape, r in reports.items()}


def trajectory_to_csv(traj: Trajectory) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    has_q = traj.quat is not None
    w.writerow(_COLUMNS + (_QCOLUMNS if has_q else ()))
    for i in range(len(traj)):
        row = [int(traj.t_us[i]), *map(repr, map(float, traj.pos[i]))]
        if has_q:
            row += list(map(repr, map(float, traj.quat[i])))
        w.writerow(row)
    return buf.getvalue()


def write_trajectory(path, traj: Trajectory) -> None:
    path = Path(path)
    if path.suffix == ".jsonl":
        recs = []
        for i in range(len(traj)):
            r = {"t_us": int(traj.t_us[i]), "x": float(traj.pos[i, 0]), "y": float(traj.pos[i, 1]), "z": float(traj.pos[i, 2])}
            if traj.quat is not None:
                r.update(zip(_QCOLUMNS, map(float, traj.quat[i])))
            recs.append(json.dumps(r))
        atomic_write_text(path, "".join(line + "\n" for line in recs))
    else:
        atomic_write_text(path, trajectory_to_csv(traj))


def _from_rows(rows: list[dict], source) -> Trajectory:
    if not rows:
        raise EmptyTrajectory(f"{source}: no samples")
    try:
        t = [int(r["t_us"]) for r in rows]
        pos = [[float(r[k]) for k in "xyz"] for r in rows]
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"{source}: bad trajectory row ({exc})") from None
    quat = None
    if all(k in rows[0] and rows[0][k] not in (None, "") for k in _QCOLUMNS):
        quat = [[float(r[k]) for k in _QCOLUMNS] for r in rows]
    return Trajectory(t, pos, quat)


def read_trajectory(path) -> Trajectory:
    """Load a trajectory from CSV (``t_us,x,y,z[,qw,qx,qy,qz]``) or the JSON Lines equivalent."""
    path = Path(path)
    if path.suffix == ".jsonl":
        return _from_rows(list(read_jsonl(path)), path)
    with open(path, newline="") as fh:
        return _from_rows(list(csv.DictReader(fh)), path)
