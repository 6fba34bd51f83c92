from .live import DatagramTransport
from .sim import Jitter, JitterKind, LinkModel, SimClock, SimLink, SimNetwork, sim_run_until, sim_send
from .wire import JoinAck, LockPayload, Message, MsgType, Probe, decode, encode

__all__ = [
    "DatagramTransport", "Jitter", "JitterKind", "JoinAck", "LinkModel", "LockPayload", "Message",
    "MsgType", "Probe", "SimClock", "SimLink", "SimNetwork", "decode", "encode", "sim_run_until", "sim_send",
]
