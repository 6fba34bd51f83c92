"""Server and client state machines for adaptive scene synchronization.

The nodes know nothing about transports or clocks. Every entry point takes
the current time and returns a list of ``(destination, Message)`` pairs for
the driver to send, so the same objects run inside the simulator and over
UDP.
"""

from __future__ import annotations

import enum
import logging
import threading
import time
from dataclasses import dataclass
from typing import Optional

from .errors import JoinError, ProtocolError, ValidationError
from .geometry import Pose
from .net.wire import JoinAck, LockPayload, Message, MsgType, Probe
from .scene import Action, ControlPacketObject, SceneObject, begin_action
from .sync import (
    DEFAULT_HISTORY,
    GAMMA_MAX,
    GAMMA_MIN,
    GAMMA_START,
    DelayHistory,
    DriftVector,
    adapt_probe_rate,
    correct_pose,
    record_delay,
    rtt_to_delay,
)

log = logging.getLogger(__name__)

Outbound = list[tuple[int, Message]]

SERVER_ID = 0
DEFAULT_T_FRAME = 1.0 / 60.0


class ProbeMode(enum.Enum):
    FIXED = "FIXED"
    ADAPTIVE = "ADAPTIVE"


class NoSyncBaseline(enum.Enum):
    """What an unsynchronized client does with a CPO.

    POSE shows the carried pose verbatim on the next render tick. ACTION
    keeps the client's own pose and only switches to the new action at
    arrival, so per-message lag differences accumulate.
    """

    POSE = "POSE"
    ACTION = "ACTION"


class ServerNode:
    """Authoritative owner of the scene; holds the locks of the objects it moves."""

    def __init__(self, node_id: int = SERVER_ID, objects: Optional[list[SceneObject]] = None):
        self.node_id = node_id
        self.scene: dict[int, SceneObject] = {o.object_id: o for o in (objects or [SceneObject(0)])}
        self.clients: list[int] = []
        self.velocities: dict[int, float] = {
            j: (o.active_action.velocity if o.active_action else 0.0) for j, o in self.scene.items()
        }
        self.changed_scene = False
        self.new_client_request = False
        self.events: list[tuple[float, str, str]] = []

    def _log(self, now: float, tag: str, detail: str = "") -> None:
        self.events.append((now, tag, detail))

    def acquire(self, object_id: int) -> bool:
        return self.scene[object_id].acquire(self.node_id)

    def snapshot(self, now: float) -> JoinAck:
        cpos = tuple(o.snapshot(now) for _, o in sorted(self.scene.items()))
        return JoinAck(now, cpos, dict(self.velocities))

    def user_action(self, object_id: int, action: Action, now: float) -> Outbound:
        """Start ``action`` locally and broadcast its CPO to every client."""
        obj = self.scene.get(object_id)
        if obj is None:
            raise ValidationError(f"unknown object {object_id}")
        cpo = begin_action(obj, action, now, self.node_id)
        self.velocities[object_id] = action.velocity
        self.changed_scene = True
        self._log(now, "begin_action", f"object={object_id} action={action.action_id}")
        out = self.broadcast(cpo, now)
        self.changed_scene = False
        return out

    def broadcast(self, cpo: ControlPacketObject, now: float) -> Outbound:
        msg = Message(MsgType.CPO_BROADCAST, self.node_id, cpo)
        self._log(now, "broadcast", f"object={cpo.object_id} clients={len(self.clients)}")
        return [(k, msg) for k in self.clients]

    def handle(self, msg: Message, now: float) -> Outbound:
        t = msg.msg_type
        if t == MsgType.PROBE_PING:
            return [(msg.sender, Message(MsgType.PROBE_PONG, self.node_id, msg.payload))]
        if t == MsgType.JOIN:
            self.new_client_request = True
            if msg.sender not in self.clients:
                self.clients.append(msg.sender)
            self._log(now, "join", f"client={msg.sender}")
            ack = Message(MsgType.JOIN_ACK, self.node_id, self.snapshot(now))
            self.new_client_request = False
            return [(msg.sender, ack)]
        if t == MsgType.LOCK_REQ:
            j = msg.payload.object_id
            obj = self.scene.get(j)
            granted = obj is not None and obj.acquire(msg.sender)
            self._log(now, "lock_grant" if granted else "lock_deny", f"object={j} node={msg.sender}")
            reply = MsgType.LOCK_GRANT if granted else MsgType.LOCK_DENY
            return [(msg.sender, Message(reply, self.node_id, LockPayload(j)))]
        if t == MsgType.LOCK_RELEASE:
            obj = self.scene.get(msg.payload.object_id)
            if obj is not None:
                obj.release(msg.sender)
            return []
        raise ProtocolError(f"server cannot handle {t.name}")

    def render_tick(self, now: float) -> None:
        for obj in self.scene.values():
            obj.advance(now)


@dataclass
class ProbeRecord:
    time: float
    h0: float
    h_mean: float
    sigma: float
    gamma_0: float


class ClientNode:
    """Replica that compensates CPOs by its measured delay (or not, for a baseline).

    With ``sync_enabled`` a CPO is applied on receipt, moved forward by the
    drift value ``velocity * T_n``. Without it the behaviour is chosen by
    ``baseline`` (see :class:`NoSyncBaseline`).
    """

    def __init__(
        self,
        node_id: int,
        server_id: int = SERVER_ID,
        sync_enabled: bool = True,
        probe_mode: ProbeMode = ProbeMode.ADAPTIVE,
        history_size: int = DEFAULT_HISTORY,
        boot_probes: Optional[int] = None,
        gamma_min: float = GAMMA_MIN,
        gamma_max: float = GAMMA_MAX,
        gamma_start: float = GAMMA_START,
        join_timeout: float = 5.0,
        baseline: NoSyncBaseline = NoSyncBaseline.POSE,
    ):
        self.node_id = node_id
        self.server_id = server_id
        self.sync_enabled = sync_enabled
        self.probe_mode = ProbeMode(probe_mode)
        self.baseline = NoSyncBaseline(baseline)
        self.boot_probes = history_size if boot_probes is None else boot_probes
        if self.boot_probes < 1:
            raise ValidationError("need at least one bootstrap probe")
        self.join_timeout = join_timeout
        self.hist = DelayHistory(p=history_size, gamma_min=gamma_min, gamma_max=gamma_max, gamma_0=gamma_start)

        self.scene: dict[int, SceneObject] = {}
        self.velocities: dict[int, float] = {}
        self.T_n: Optional[float] = None
        self.D_n = DriftVector(node_id, {}, 0.0)
        self.changed_scene = False
        self.trigger = False
        self.new_client_request = False

        self.joined = False
        self.ready = False
        self.join_deadline: Optional[float] = None
        self.next_probe_at: Optional[float] = None
        self.probes_sent = 0
        self.boot_probes_sent = 0
        self.probe_log: list[ProbeRecord] = []
        self.lock_replies: dict[int, bool] = {}
        self.events: list[tuple[float, str, str]] = []

        self._probe_ids = 0
        self._pending_probes: dict[int, float] = {}
        self._last_cpo: dict[int, tuple[ControlPacketObject, float]] = {}
        self._queued: dict[int, ControlPacketObject] = {}

    def _log(self, now: float, tag: str, detail: str = "") -> None:
        self.events.append((now, tag, detail))

    # -- initialization -------------------------------------------------

    def start(self, now: float) -> Outbound:
        self.join_deadline = now + self.join_timeout
        self.new_client_request = True
        self._log(now, "join_request")
        return [(self.server_id, Message(MsgType.JOIN, self.node_id))]

    def _on_join_ack(self, ack: JoinAck, now: float) -> Outbound:
        if self.joined:
            return []
        self.joined = True
        self.new_client_request = False
        self.velocities = dict(ack.velocities)
        self._log(now, "UpdateActions", "join")
        for cpo in ack.objects:
            self.scene[cpo.object_id] = SceneObject(cpo.object_id)
            self.scene[cpo.object_id].install(cpo.pose, cpo.action, now)
            self._last_cpo[cpo.object_id] = (cpo, now)
        return [self._ping(now, boot=True)]

    def _update_local_scene(self, now: float) -> None:
        """Re-anchor every object on its latest CPO using the fresh delay estimate."""
        self.update_drift(now)
        if not self.sync_enabled:
            return
        for j, (cpo, received) in self._last_cpo.items():
            pose = correct_pose(cpo, self.T_n, since_receipt=now - received)
            self.scene[j].install(pose, cpo.action, now)
        self._log(now, "UpdateLocalScene")

    # -- drift bookkeeping ------------------------------------------------

    def update_drift(self, now: float) -> DriftVector:
        self.D_n = DriftVector.compute(self.node_id, self.velocities, self.T_n or 0.0)
        self._log(now, "UpdateDrift", f"T_n={self.T_n!r}")
        return self.D_n

    # -- probing ---------------------------------------------------------

    def _ping(self, now: float, boot: bool = False) -> tuple[int, Message]:
        self._probe_ids += 1
        self._pending_probes[self._probe_ids] = now
        if boot:
            self.boot_probes_sent += 1
        else:
            self.probes_sent += 1
        return (self.server_id, Message(MsgType.PROBE_PING, self.node_id, Probe(self._probe_ids, now)))

    @property
    def probe_interval(self) -> float:
        return 1.0 / self.hist.gamma_0

    def _on_pong(self, probe: Probe, now: float) -> Outbound:
        sent = self._pending_probes.pop(probe.probe_id, None)
        if sent is None:
            return []  # abandoned or duplicate
        h0 = rtt_to_delay(now - probe.origin_timestamp)
        record_delay(self.hist, h0)
        self.T_n = self.hist.h_mean
        if self.probe_mode is ProbeMode.ADAPTIVE:
            adapt_probe_rate(self.hist, h0)
        self.probe_log.append(ProbeRecord(now, h0, self.hist.h_mean, self.hist.sigma, self.hist.gamma_0))

        if not self.ready:
            if len(self.hist.samples) < self.boot_probes:
                return [self._ping(now, boot=True)]
            self.ready = True
            self._update_local_scene(now)
            self.next_probe_at = now + self.probe_interval
            self._log(now, "ready", f"T_n={self.T_n!r}")
            return []
        self.update_drift(now)
        self.next_probe_at = max(now, sent + self.probe_interval)
        return []

    def _expire_probes(self, now: float) -> None:
        rtt = 2.0 * (self.T_n or 0.0)
        limit = max(10.0 * rtt, 1e-3)
        for pid, sent in list(self._pending_probes.items()):
            if now - sent > limit:
                del self._pending_probes[pid]
                self._log(now, "probe_abandoned", f"id={pid}")

    def next_deadline(self) -> Optional[float]:
        if not self.joined:
            return self.join_deadline
        return self.next_probe_at

    def on_timer(self, now: float) -> Outbound:
        if not self.joined:
            if self.join_deadline is not None and now >= self.join_deadline:
                raise JoinError(f"client {self.node_id}: no JOIN_ACK within {self.join_timeout} s")
            return []
        if self.next_probe_at is None or now < self.next_probe_at:
            return []
        self.trigger = True
        self._expire_probes(now)
        out = [self._ping(now)]
        # provisional; the pong reschedules with the adapted rate
        self.next_probe_at = now + self.probe_interval
        self.trigger = False
        return out

    # -- scene updates ----------------------------------------------------

    def _on_cpo(self, cpo: ControlPacketObject, now: float) -> None:
        obj = self.scene.get(cpo.object_id)
        if obj is None:
            raise ProtocolError(f"client {self.node_id}: CPO for unknown object {cpo.object_id}")
        self.changed_scene = True
        self.velocities[cpo.object_id] = cpo.action.velocity
        self._log(now, "UpdateActions", f"object={cpo.object_id} action={cpo.action.action_id}")
        self.update_drift(now)
        self._last_cpo[cpo.object_id] = (cpo, now)
        if self.sync_enabled:
            pose = correct_pose(cpo, self.T_n or 0.0)
            obj.install(pose, cpo.action, now)
            self._log(now, "pose_write", f"object={cpo.object_id}")
        elif self.baseline is NoSyncBaseline.ACTION:
            obj.install(obj.advance(now), cpo.action, now)
        else:
            self._queued[cpo.object_id] = cpo
        self.changed_scene = False

    def handle(self, msg: Message, now: float) -> Outbound:
        t = msg.msg_type
        if t == MsgType.JOIN_ACK:
            return self._on_join_ack(msg.payload, now)
        if t == MsgType.PROBE_PONG:
            return self._on_pong(msg.payload, now)
        if t == MsgType.CPO_BROADCAST:
            self._on_cpo(msg.payload, now)
            return []
        if t in (MsgType.LOCK_GRANT, MsgType.LOCK_DENY):
            self.lock_replies[msg.payload.object_id] = t == MsgType.LOCK_GRANT
            return []
        raise ProtocolError(f"client cannot handle {t.name}")

    def request_lock(self, object_id: int) -> Outbound:
        return [(self.server_id, Message(MsgType.LOCK_REQ, self.node_id, LockPayload(object_id)))]

    def release_lock(self, object_id: int) -> Outbound:
        self.lock_replies.pop(object_id, None)
        return [(self.server_id, Message(MsgType.LOCK_RELEASE, self.node_id, LockPayload(object_id)))]

    def render_tick(self, now: float) -> None:
        for j, obj in self.scene.items():
            cpo = self._queued.pop(j, None)
            if cpo is not None:
                obj.install(cpo.pose, cpo.action, now)
                self._log(now, "pose_write", f"object={j}")
            else:
                obj.advance(now)

    def pose(self, object_id: int) -> Pose:
        return self.scene[object_id].pose


def render_tick(node, now: float) -> None:
    node.render_tick(now)


class LiveRunner:
    """Drives one node over a :class:`~scenesync.net.live.DatagramTransport` in a thread.

    Time is ``time.monotonic()`` relative to ``epoch`` so that several nodes in
    one process share a time base.
    """

    def __init__(self, node, transport, t_frame: float = DEFAULT_T_FRAME, epoch: Optional[float] = None):
        self.node = node
        self.transport = transport
        self.t_frame = t_frame
        self.epoch = time.monotonic() if epoch is None else epoch
        self.stop_event = threading.Event()
        self.error: Optional[BaseException] = None
        self._lock = threading.Lock()
        self._thread: Optional[threading.Thread] = None

    def now(self) -> float:
        return time.monotonic() - self.epoch

    def send(self, out: Outbound) -> None:
        for dst, msg in out:
            self.transport.live_send(dst, msg)

    def call(self, fn, *args) -> None:
        """Run ``fn(*args, now)`` on the node under the runner's lock and send its output."""
        with self._lock:
            out = fn(*args, self.now())
        if out:
            self.send(out)

    def _loop(self) -> None:
        next_tick = self.now()
        try:
            if isinstance(self.node, ClientNode):
                self.call(self.node.start)
            while not self.stop_event.is_set():
                wake = next_tick
                if isinstance(self.node, ClientNode):
                    d = self.node.next_deadline()
                    if d is not None:
                        wake = min(wake, d)
                msg = self.transport.live_recv(timeout=max(0.0, wake - self.now()))
                if msg is not None:
                    self.call(self.node.handle, msg)
                now = self.now()
                if isinstance(self.node, ClientNode):
                    d = self.node.next_deadline()
                    if d is not None and now >= d:
                        self.call(self.node.on_timer)
                if now >= next_tick:
                    with self._lock:
                        self.node.render_tick(now)
                    next_tick += self.t_frame
        except BaseException as exc:  # surfaced to the caller via .error
            self.error = exc
            log.exception("live node %s stopped", getattr(self.node, "node_id", "?"))

    def start(self) -> LiveRunner:
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()
        return self

    def stop(self, timeout: float = 2.0) -> None:
        self.stop_event.set()
        if self._thread is not None:
            self._thread.join(timeout)
