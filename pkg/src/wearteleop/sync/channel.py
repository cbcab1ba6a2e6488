"""Simulated lossy, delaying message channel on a virtual microsecond clock."""

from __future__ import annotations

import heapq

import numpy as np

from ..config import ChannelModel


class SimChannel:
    """Message channel from Host 1 to Host 2.

    ``send`` decides the fate of a frame immediately from the seeded PRNG so
    the same seed and send sequence always yield the same deliveries.
    """

    def __init__(self, model: ChannelModel | None = None):
        self.model = model or ChannelModel()
        self._rng = np.random.default_rng(self.model.seed)
        self._queue: list[tuple[int, int, bytes]] = []
        self._seq = 0
        self.sent = 0
        self.dropped = 0
        self.corrupted = 0
        self.delivered = 0

    def send(self, frame: bytes, now_us: int) -> int | None:
        """Queue ``frame``; returns its delivery time, or None if dropped."""
        m = self.model
        self.sent += 1
        # always draw the same number of variates per message to keep streams aligned
        u_drop, u_corrupt = self._rng.random(2)
        jitter = int(self._rng.integers(-m.jitter_us, m.jitter_us + 1)) if m.jitter_us else 0
        byte_idx = int(self._rng.integers(len(frame)))
        bit = int(self._rng.integers(8))
        if u_drop < m.drop_prob:
            self.dropped += 1
            return None
        if u_corrupt < m.corrupt_prob:
            buf = bytearray(frame)
            buf[byte_idx] ^= 1 << bit
            frame = bytes(buf)
            self.corrupted += 1
        deliver = now_us + max(0, m.latency_us + jitter)
        heapq.heappush(self._queue, (deliver, self._seq, frame))
        self._seq += 1
        return deliver

    def poll(self, now_us: int) -> list[bytes]:
        """Non-blocking: every frame due at or before ``now_us``, in arrival order."""
        out = []
        while self._queue and self._queue[0][0] <= now_us:
            out.append(heapq.heappop(self._queue)[2])
        self.delivered += len(out)
        return out

    def __len__(self):
        return len(self._queue)
