"""Run configuration with file loading and flag overrides.

Precedence is command-line flag > config file > built-in default. Config
files are flat TOML (``key = value``); JSON files with the same keys are also
accepted so an echoed effective config can be fed back in.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ValidationError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass
class ChannelModel:
    """One-way message channel between the hosts.

    Delay is ``latency_us`` plus uniform jitter in ``[-jitter_us, jitter_us]``,
    floored at zero. Each message is independently dropped with ``drop_prob``
    and, if delivered, has one random byte flipped with ``corrupt_prob``.
    """

    latency_us: int = 0
    jitter_us: int = 0
    drop_prob: float = 0.0
    corrupt_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.latency_us < 0 or self.jitter_us < 0:
            raise ValidationError("channel latency and jitter must be >= 0")
        for name in ("drop_prob", "corrupt_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name} must be in [0, 1], got {p}")


@dataclass
class RunConfig:
    # process periods in microseconds
    semg_period_us: int = 5000
    imu_period_us: int = 20000
    receive_period_us: int = 4000
    control_period_us: int = 1000

    smoothing_window: int = 10
    staleness_us: int = 100_000
    d_max: float = 0.05
    workspace_half: float = 0.5
    calib_p: list[float] = field(default_factory=lambda: [0.4, 0.0, 0.3])
    calib_q: list[float] = field(default_factory=lambda: [1.0, 0.0, 0.0, 0.0])

    window_len: int = 100
    hop: int = 100
    debounce: int = 2

    l_upper: float = 0.30
    l_forearm: float = 0.25

    tail_us: int = 100_000
    pair_tol_us: int = 2000

    def __post_init__(self):
        for name in ("semg_period_us", "imu_period_us", "receive_period_us", "control_period_us"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.smoothing_window < 1 or self.staleness_us < 0 or self.d_max <= 0 or self.workspace_half <= 0:
            raise ValidationError("invalid smoothing/staleness/clamp settings")
        if len(self.calib_p) != 3 or len(self.calib_q) != 4:
            raise ValidationError("calib_p takes 3 values and calib_q 4")


def _known(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def load_config_file(path) -> dict:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text) if path.suffix == ".json" else tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ValidationError(f"{path}: cannot parse config ({exc})") from None
    return data


def build_configs(file_values: dict | None = None, overrides: dict | None = None) -> tuple[RunConfig, ChannelModel]:
    """Merge defaults, file values and non-None overrides into (RunConfig, ChannelModel).

    Channel keys may appear at top level or inside a ``channel`` table. An
    ``inputs`` table (run metadata in an echoed config) is ignored.
    """
    merged: dict = {}
    chan: dict = {}
    for src in (file_values or {}, {k: v for k, v in (overrides or {}).items() if v is not None}):
        for k, v in src.items():
            if k == "inputs":
                continue
            if k == "channel" and isinstance(v, dict):
                chan.update(v)
            elif k in _known(ChannelModel):
                chan[k] = v
            elif k in _known(RunConfig):
                merged[k] = v
            else:
                raise ValidationError(f"unknown config key {k!r}")
    try:
        return RunConfig(**merged), ChannelModel(**chan)
    except TypeError as exc:
        raise ValidationError(str(exc)) from None


def effective_config(run: RunConfig, channel: ChannelModel, **extra) -> dict:
    d = asdict(run)
    d["channel"] = asdict(channel)
    d["inputs"] = extra
    return d
