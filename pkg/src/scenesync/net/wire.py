"""Binary wire format.

Every message is ``[type u8][sender u32][payload_len u32][payload]``, all
little-endian, reals as IEEE-754 binary64.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field
from typing import Mapping, Union

from ..errors import EncodingError, ProtocolError, SceneSyncError
from ..geometry import Pose, Quaternion
from ..scene import Action, ActionKind, ControlPacketObject

MAX_DATAGRAM = 1400
NORM_TOL = 1e-6

_HEADER = struct.Struct("<BII")
_CPO = struct.Struct("<Id3d4dIB3ddd")
_PROBE = struct.Struct("<Id")
_LOCK = struct.Struct("<I")
_ACK_HEAD = struct.Struct("<dI")
_COUNT = struct.Struct("<I")
_VELOCITY = struct.Struct("<Id")

HEADER_SIZE = _HEADER.size
CPO_PAYLOAD_SIZE = _CPO.size


class MsgType(enum.IntEnum):
    JOIN = 0x01
    JOIN_ACK = 0x02
    LOCK_REQ = 0x03
    LOCK_GRANT = 0x04
    LOCK_DENY = 0x05
    CPO_BROADCAST = 0x06
    PROBE_PING = 0x07
    PROBE_PONG = 0x08
    LOCK_RELEASE = 0x09


@dataclass(frozen=True)
class Probe:
    probe_id: int
    origin_timestamp: float


@dataclass(frozen=True)
class LockPayload:
    object_id: int


@dataclass(frozen=True)
class JoinAck:
    """Scene snapshot plus the server's per-object velocity vector."""

    server_timestamp: float
    objects: tuple[ControlPacketObject, ...] = ()
    velocities: Mapping[int, float] = field(default_factory=dict)


Payload = Union[None, Probe, LockPayload, JoinAck, ControlPacketObject]

_LOCK_TYPES = {MsgType.LOCK_REQ, MsgType.LOCK_GRANT, MsgType.LOCK_DENY, MsgType.LOCK_RELEASE}
_PROBE_TYPES = {MsgType.PROBE_PING, MsgType.PROBE_PONG}


@dataclass(frozen=True)
class Message:
    msg_type: MsgType
    sender: int
    payload: Payload = None


def _pack_cpo(c: ControlPacketObject) -> bytes:
    q = c.pose.orientation
    a = c.action
    return _CPO.pack(
        c.object_id, c.server_timestamp, *c.pose.position, q.w, q.x, q.y, q.z,
        a.action_id, int(a.kind), *a.direction, a.velocity, a.start_time,
    )


def _unpack_cpo(buf: bytes, offset: int = 0) -> ControlPacketObject:
    f = _CPO.unpack_from(buf, offset)
    object_id, ts = f[0], f[1]
    position = f[2:5]
    q = Quaternion(*f[5:9])
    action_id, kind = f[9], f[10]
    direction, velocity, start = f[11:14], f[14], f[15]
    if not math.isfinite(q.norm()) or abs(q.norm() - 1.0) > NORM_TOL:
        raise ProtocolError(f"CPO orientation is not unit length (norm {q.norm()})")
    if kind not in (0, 1):
        raise ProtocolError(f"unknown action kind {kind}")
    try:
        pose = Pose(tuple(position), q)
        action = Action(action_id, ActionKind(kind), tuple(direction), velocity, start)
    except SceneSyncError as exc:
        raise ProtocolError(f"invalid CPO contents: {exc}") from exc
    return ControlPacketObject(object_id, ts, pose, action)


def _encode_payload(msg: Message) -> bytes:
    t, p = msg.msg_type, msg.payload
    if t == MsgType.JOIN:
        return b""
    if t in _PROBE_TYPES:
        return _PROBE.pack(p.probe_id, p.origin_timestamp)
    if t in _LOCK_TYPES:
        return _LOCK.pack(p.object_id)
    if t == MsgType.CPO_BROADCAST:
        return _pack_cpo(p)
    if t == MsgType.JOIN_ACK:
        parts = [_ACK_HEAD.pack(p.server_timestamp, len(p.objects))]
        parts += [_pack_cpo(c) for c in p.objects]
        parts.append(_COUNT.pack(len(p.velocities)))
        parts += [_VELOCITY.pack(j, v) for j, v in sorted(p.velocities.items())]
        return b"".join(parts)
    raise EncodingError(f"unknown message type {t!r}")


def encode(msg: Message) -> bytes:
    try:
        kind = MsgType(msg.msg_type)
        payload = _encode_payload(msg)
    except (struct.error, AttributeError, TypeError, ValueError) as exc:
        raise EncodingError(f"cannot encode {msg!r}: {exc}") from exc
    data = _HEADER.pack(kind, msg.sender, len(payload)) + payload
    if len(data) > MAX_DATAGRAM:
        raise EncodingError(f"encoded message is {len(data)} bytes, limit {MAX_DATAGRAM}")
    return data


def _expect(payload: bytes, size: int, t: MsgType) -> None:
    if len(payload) != size:
        raise ProtocolError(f"{t.name} payload must be {size} bytes, got {len(payload)}")


def decode(data: bytes) -> Message:
    if len(data) < HEADER_SIZE:
        raise ProtocolError(f"truncated header ({len(data)} bytes)")
    type_byte, sender, length = _HEADER.unpack_from(data)
    try:
        t = MsgType(type_byte)
    except ValueError:
        raise ProtocolError(f"unknown message type 0x{type_byte:02X}") from None
    payload = bytes(data[HEADER_SIZE:])
    if len(payload) != length:
        raise ProtocolError(f"payload length field says {length}, got {len(payload)} bytes")

    if t == MsgType.JOIN:
        _expect(payload, 0, t)
        return Message(t, sender)
    if t in _PROBE_TYPES:
        _expect(payload, _PROBE.size, t)
        return Message(t, sender, Probe(*_PROBE.unpack(payload)))
    if t in _LOCK_TYPES:
        _expect(payload, _LOCK.size, t)
        return Message(t, sender, LockPayload(*_LOCK.unpack(payload)))
    if t == MsgType.CPO_BROADCAST:
        _expect(payload, _CPO.size, t)
        return Message(t, sender, _unpack_cpo(payload))

    # JOIN_ACK
    if len(payload) < _ACK_HEAD.size:
        raise ProtocolError("truncated JOIN_ACK")
    ts, n = _ACK_HEAD.unpack_from(payload)
    off = _ACK_HEAD.size
    if len(payload) < off + n * _CPO.size + _COUNT.size:
        raise ProtocolError("truncated JOIN_ACK object list")
    objects = tuple(_unpack_cpo(payload, off + i * _CPO.size) for i in range(n))
    off += n * _CPO.size
    (nv,) = _COUNT.unpack_from(payload, off)
    off += _COUNT.size
    _expect(payload, off + nv * _VELOCITY.size, t)
    velocities = dict(_VELOCITY.unpack_from(payload, off + i * _VELOCITY.size) for i in range(nv))
    return Message(t, sender, JoinAck(ts, objects, velocities))
