"""Two-host motion mapping synchronization: wire codec, hosts, simulator and live runner."""

from .channel import SimChannel
from .hosts import Host1, Host2, SyncState
from .sim import Scenario, SimResult, filtered_reference, run_simulation
from .wire import FrameReader, Kind, WireMessage, decode_message, encode_message

__all__ = [
    "FrameReader",
    "Host1",
    "Host2",
    "Kind",
    "Scenario",
    "SimChannel",
    "SimResult",
    "SyncState",
    "WireMessage",
    "decode_message",
    "encode_message",
    "filtered_reference",
    "run_simulation",
]
