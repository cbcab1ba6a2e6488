"""sEMG window features and binary grasp recognition.

Raw samples are consumed as delivered by the armband: no band-pass filtering
or rectification is applied before feature extraction.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit

from .errors import (
    ChannelCountMismatch,
    NonFiniteFeature,
    SingleClassDataset,
    TrainingDiverged,
    ValidationError,
    WindowTooShort,
)

log = logging.getLogger(__name__)

N_CHANNELS = 8
N_FEATURES = 3 * N_CHANNELS
DEFAULT_WINDOW_LEN = 100
OPEN, CLOSE = 0, 1


@dataclass(frozen=True)
class SemgFrame:
    t_us: int
    ch: tuple[int, ...]

    def __post_init__(self):
        if len(self.ch) != N_CHANNELS:
            raise ChannelCountMismatch(f"expected {N_CHANNELS} channels, got {len(self.ch)}")
        if not np.all(np.isfinite(self.ch)):
            raise NonFiniteFeature(f"non-finite sEMG sample at t={self.t_us}")


@dataclass(frozen=True)
class FeatureConfig:
    window_len: int = DEFAULT_WINDOW_LEN
    hop: int = DEFAULT_WINDOW_LEN

    def __post_init__(self):
        if self.window_len < 2 or self.hop < 1:
            raise ValidationError(f"need window_len >= 2 and hop >= 1, got {self.window_len}, {self.hop}")


@dataclass(frozen=True)
class GripCommand:
    t_us: int
    state: int

    def __post_init__(self):
        if self.state not in (OPEN, CLOSE):
            raise ValidationError(f"grip state must be 0 or 1, got {self.state}")


def _samples(window) -> np.ndarray:
    x = np.asarray(window, dtype=float)
    if x.shape[0] < 2:
        raise WindowTooShort(f"feature window needs at least 2 samples, got {x.shape[0]}")
    return x


# Each feature works on a 1-D single-channel window or column-wise on (N_t, channels).
def feat_mav(window) -> np.ndarray | float:
    """Mean absolute value."""
    return np.mean(np.abs(_samples(window)), axis=0)


def feat_wl(window) -> np.ndarray | float:
    """Waveform length: summed absolute first differences."""
    return np.sum(np.abs(np.diff(_samples(window), axis=0)), axis=0)


def feat_rms(window) -> np.ndarray | float:
    """Root mean square."""
    return np.sqrt(np.mean(np.square(_samples(window)), axis=0))


def _window_array(window) -> np.ndarray:
    if len(window) and isinstance(window[0], SemgFrame):
        window = [f.ch for f in window]
    x = np.asarray(window, dtype=float)
    if x.ndim != 2 or x.shape[1] != N_CHANNELS:
        raise ChannelCountMismatch(f"expected window of shape (N_t, {N_CHANNELS}), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteFeature("window contains non-finite samples")
    return x


def build_feature_vector(window, window_len: int | None = None) -> np.ndarray:
    """24-D feature vector ``[MAV1, WL1, RMS1, ..., MAV8, WL8, RMS8]``.

    ``window`` is a sequence of SemgFrame or an ``(N_t, 8)`` array. When
    ``window_len`` is given the window must hold exactly that many samples.
    """
    x = _window_array(window)
    if window_len is not None and x.shape[0] != window_len:
        raise WindowTooShort(f"window holds {x.shape[0]} samples, expected {window_len}")
    feats = np.stack([feat_mav(x), feat_wl(x), feat_rms(x)], axis=1)  # (8, 3)
    return feats.reshape(N_FEATURES)


@dataclass
class TrainConfig:
    lam: float = 1e-4
    epochs: int = 500
    lr: float | None = None  # None: 1/L from the data's Lipschitz bound
    report_every: int = 50


@dataclass
class LogisticModel:
    w: np.ndarray
    b: float
    mean: np.ndarray = field(default_factory=lambda: np.zeros(N_FEATURES))
    std: np.ndarray = field(default_factory=lambda: np.ones(N_FEATURES))
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.mean = np.asarray(self.mean, dtype=float)
        self.std = np.asarray(self.std, dtype=float)
        self.b = float(self.b)
        if not (np.all(np.isfinite(self.w)) and np.isfinite(self.b)):
            raise NonFiniteFeature("model parameters must be finite")

    def logits(self, x) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - self.mean) / self.std
        return z @ self.w + self.b

    def to_dict(self) -> dict:
        return {
            "w": self.w.tolist(),
            "b": self.b,
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d: dict) -> LogisticModel:
        try:
            m = cls(d["w"], d["b"], d.get("mean", np.zeros(N_FEATURES)), d.get("std", np.ones(N_FEATURES)), d.get("config", {}))
        except KeyError as exc:
            raise ValidationError(f"model file missing field {exc}") from None
        if not (m.w.shape == m.mean.shape == m.std.shape == (N_FEATURES,)):
            raise ValidationError("model vectors must each hold 24 values")
        return m


def predict_prob(model: LogisticModel, x) -> float | np.ndarray:
    """Probability of the contracted class, ``sigmoid(wᵀx + b)``."""
    p = expit(model.logits(x))
    return float(p) if np.ndim(p) == 0 else p


def decide(p: float) -> int:
    """Gripper decision: close only when ``p`` is strictly above 0.5."""
    return CLOSE if p > 0.5 else OPEN


def _loss(z, y, w, lam):
    # mean cross-entropy on logits, numerically stable
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + lam * (w @ w))


def train(dataset: Iterable[tuple[Sequence[float], int]], config: TrainConfig | None = None) -> LogisticModel:
    """Fit an L2-regularized logistic regression by full-batch gradient descent.

    Features are standardized per dimension and the mean/std are stored on the
    returned model. Parameters start at zero. With the default step size
    (inverse of the loss's gradient Lipschitz constant) the loss decreases
    monotonically; a user-supplied step that makes it increase raises
    TrainingDiverged with the loss history attached.
    """
    config = config or TrainConfig()
    pairs = list(dataset)
    if not pairs:
        raise SingleClassDataset("empty dataset")
    X = np.asarray([p[0] for p in pairs], dtype=float)
    y = np.asarray([p[1] for p in pairs], dtype=float)
    if X.ndim != 2 or X.shape[1] != N_FEATURES:
        raise ValidationError(f"features must be {N_FEATURES}-D, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("dataset contains non-finite features")
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise ValidationError("labels must be 0 or 1")
    if len(np.unique(y)) < 2:
        raise SingleClassDataset("dataset needs both labels to train")

    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std < 1e-12] = 1.0
    Z = (X - mean) / std
    n = len(y)

    lr = config.lr
    if lr is None:
        Za = np.hstack([Z, np.ones((n, 1))])
        lipschitz = 0.25 * np.linalg.eigvalsh(Za.T @ Za / n)[-1] + 2.0 * config.lam
        lr = 1.0 / lipschitz

    w = np.zeros(N_FEATURES)
    b = 0.0
    history = [_loss(Z @ w + b, y, w, config.lam)]
    for epoch in range(1, config.epochs + 1):
        z = Z @ w + b
        r = expit(z) - y
        w = w - lr * (Z.T @ r / n + 2.0 * config.lam * w)
        b = b - lr * float(np.mean(r))
        loss = _loss(Z @ w + b, y, w, config.lam)
        if loss > history[-1] + 1e-12:
            raise TrainingDiverged(f"loss rose from {history[-1]:.6g} to {loss:.6g} at epoch {epoch} (lr={lr:.4g})", history + [loss])
        history.append(loss)
        if config.report_every and epoch % config.report_every == 0:
            log.debug("epoch %d loss %.6g", epoch, loss)

    cfg = asdict(config)
    cfg["lr"] = lr
    cfg["final_loss"] = history[-1]
    cfg["n_samples"] = n
    return LogisticModel(w, b, mean, std, cfg)


def accuracy(model: LogisticModel, X, y) -> float:
    pred = (predict_prob(model, np.asarray(X)) > 0.5).astype(int)
    return float(np.mean(pred == np.asarray(y)))


class StreamingWindower:
    """Turns a frame stream into feature windows of ``window_len`` frames every ``hop`` frames."""

    def __init__(self, config: FeatureConfig | None = None):
        self.config = config or FeatureConfig()
        self._buf: deque = deque()
        self._skip = 0

    def push(self, frame) -> np.ndarray | None:
        """Add one frame; return the window as an ``(N_t, 8)`` array when one completes."""
        ch = frame.ch if isinstance(frame, SemgFrame) else frame
        if len(ch) != N_CHANNELS:
            raise ChannelCountMismatch(f"expected {N_CHANNELS} channels, got {len(ch)}")
        if self._skip:
            self._skip -= 1
            return None
        self._buf.append(tuple(ch))
        if len(self._buf) < self.config.window_len:
            return None
        window = np.asarray(self._buf, dtype=float)
        drop = min(self.config.hop, len(self._buf))
        for _ in range(drop):
            self._buf.popleft()
        self._skip = self.config.hop - drop
        return window


class Debouncer:
    """Emits a state change only after ``count`` consecutive matching decisions."""

    def __init__(self, count: int = 2, initial: int = OPEN):
        if count < 1:
            raise ValidationError("debounce count must be >= 1")
        self.count = count
        self.state = initial
        self._candidate = initial
        self._run = 0

    def update(self, decision: int) -> int | None:
        """Feed one decision; returns the new state on a transition, else None."""
        if decision == self.state:
            self._run = 0
            self._candidate = decision
            return None
        if decision == self._candidate:
            self._run += 1
        else:
            self._candidate = decision
            self._run = 1
        if self._run >= self.count:
            self.state = decision
            self._run = 0
            return decision
        return None


def save_model(model: LogisticModel, path) -> None:
    from .io import atomic_write_text

    atomic_write_text(path, json.dumps(model.to_dict(), indent=2))


def load_model(path) -> LogisticModel:
    return LogisticModel.from_dict(json.loads(Path(path).read_text()))


def read_dataset(path, window_len: int | None = None) -> list[tuple[np.ndarray, int]]:
    """Read a JSON Lines training file of ``{"label", "emg"}`` records into feature pairs."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            try:
                label = int(rec["label"])
                x = build_feature_vector(rec["emg"], window_len)
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"{path}:{lineno}: bad record ({exc})") from None
            if label not in (0, 1):
                raise ValidationError(f"{path}:{lineno}: label must be 0 or 1")
            out.append((x, label))
    return out


def dataset_records(windows: Iterable[tuple[np.ndarray, int]]) -> Iterable[dict]:
    for emg, label in windows:
        yield {"label": int(label), "emg": np.asarray(emg).astype(int).tolist()}
