"""Binary wire format between the two hosts.

Frame layout (all multi-byte fields little-endian unless noted)::

    magic   u8   0xA7
    version u8   1
    kind    u8   1=POSE_INC, 2=GRIP, 3=CALIBRATE
    t_us    u64
    payload POSE_INC / CALIBRATE: 7 x f64 (x, y, z, qw, qx, qy, qz)
            GRIP: u8 state
    crc     u32  CRC-32 over every preceding byte

On stream transports each frame is preceded by a 2-byte big-endian length.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from enum import IntEnum

from ..errors import BadCrc, BadMagic, DecodeError, PayloadArityMismatch, Truncated, UnknownKind
from ..kinematics import PoseIncrement
from ..quaternion import Quaternion
from ..semg import GripCommand
from ..smoothing import RobotPose

MAGIC = 0xA7
VERSION = 1

_HEADER = struct.Struct("<BBBQ")
_CRC = struct.Struct("<I")
_POSE = struct.Struct("<7d")
_GRIP = struct.Struct("<B")
_LENGTH_PREFIX = struct.Struct(">H")


class Kind(IntEnum):
    POSE_INC = 1
    GRIP = 2
    CALIBRATE = 3


_PAYLOAD = {Kind.POSE_INC: _POSE, Kind.GRIP: _GRIP, Kind.CALIBRATE: _POSE}
_ARITY = {Kind.POSE_INC: 7, Kind.GRIP: 1, Kind.CALIBRATE: 7}


@dataclass(frozen=True)
class WireMessage:
    kind: Kind
    t_us: int
    payload: tuple

    def encode(self) -> bytes:
        return encode_message(self.kind, self.t_us, self.payload)

    @classmethod
    def from_increment(cls, inc: PoseIncrement) -> WireMessage:
        return cls(Kind.POSE_INC, inc.t_us, (*inc.dp, inc.dq.eta, *inc.dq.eps))

    def to_increment(self) -> PoseIncrement:
        x, y, z, *q = self.payload
        return PoseIncrement(self.t_us, (x, y, z), Quaternion.from_array(q))

    def to_grip(self) -> GripCommand:
        return GripCommand(self.t_us, self.payload[0])

    def to_pose(self) -> RobotPose:
        x, y, z, *q = self.payload
        return RobotPose.make((x, y, z), q)


def frame_size(kind: Kind) -> int:
    return _HEADER.size + _PAYLOAD[kind].size + _CRC.size


def encode_message(kind, t_us: int, payload) -> bytes:
    try:
        kind = Kind(kind)
    except ValueError:
        raise PayloadArityMismatch(f"unknown message kind {kind!r}") from None
    fmt = _PAYLOAD[kind]
    payload = tuple(payload)
    if len(payload) != _ARITY[kind]:
        raise PayloadArityMismatch(f"{kind.name} takes {_ARITY[kind]} values, got {len(payload)}")
    if kind is Kind.GRIP and payload[0] not in (0, 1):
        raise PayloadArityMismatch(f"grip state must be 0 or 1, got {payload[0]!r}")
    body = _HEADER.pack(MAGIC, VERSION, int(kind), int(t_us)) + fmt.pack(*payload)
    return body + _CRC.pack(zlib.crc32(body))


def decode_message(frame: bytes) -> WireMessage:
    frame = bytes(frame)
    if not frame:
        raise Truncated("empty frame")
    if frame[0] != MAGIC:
        raise BadMagic(f"bad magic byte 0x{frame[0]:02x}")
    if len(frame) < _HEADER.size + _CRC.size:
        raise Truncated(f"frame of {len(frame)} bytes is shorter than the header")
    body, (crc,) = frame[: -_CRC.size], _CRC.unpack(frame[-_CRC.size :])
    if zlib.crc32(body) != crc:
        raise BadCrc("CRC mismatch")
    _, version, kind, t_us = _HEADER.unpack_from(body)
    if version != VERSION:
        raise DecodeError(f"unsupported protocol version {version}")
    try:
        kind = Kind(kind)
    except ValueError:
        raise UnknownKind(f"unknown message kind {kind}") from None
    if len(frame) != frame_size(kind):
        raise Truncated(f"{kind.name} frame must be {frame_size(kind)} bytes, got {len(frame)}")
    payload = _PAYLOAD[kind].unpack_from(body, _HEADER.size)
    if kind is Kind.GRIP and payload[0] not in (0, 1):
        raise DecodeError(f"invalid grip state {payload[0]}")
    return WireMessage(kind, t_us, payload)


def pose_increment_message(inc: PoseIncrement) -> bytes:
    return WireMessage.from_increment(inc).encode()


def grip_message(cmd: GripCommand) -> bytes:
    return encode_message(Kind.GRIP, cmd.t_us, (cmd.state,))


def calibrate_message(pose: RobotPose, t_us: int) -> bytes:
    return encode_message(Kind.CALIBRATE, t_us, (*pose.p, pose.q.eta, *pose.q.eps))


def frame_with_length(frame: bytes) -> bytes:
    return _LENGTH_PREFIX.pack(len(frame)) + frame


class FrameReader:
    """Reassembles length-prefixed frames from arbitrary stream chunks."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[bytes]:
        self._buf += data
        frames = []
        while len(self._buf) >= _LENGTH_PREFIX.size:
            (n,) = _LENGTH_PREFIX.unpack_from(self._buf)
            end = _LENGTH_PREFIX.size + n
            if len(self._buf) < end:
                break
            frames.append(bytes(self._buf[_LENGTH_PREFIX.size : end]))
            del self._buf[:end]
        return frames

    @property
    def pending(self) -> int:
        return len(self._buf)
