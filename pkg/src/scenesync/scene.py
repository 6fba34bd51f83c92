"""Shared-scene data model: actions, objects, locks, CPOs and frequency classes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .errors import AuthorizationError, OrderingError, ValidationError
from .geometry import UNIT_TOL, Pose, Vector3, apply_action

DEFAULT_WINDOW = 10.0


class ActionKind(enum.IntEnum):
    ROTATION = 0
    TRANSLATION = 1


@dataclass(frozen=True)
class Action:
    """A named constant-velocity transform applied to one object.

    ``velocity`` is in degrees/second for rotations and meters/second for
    translations. ``duration`` stays ``None`` until the next action on the
    same object begins.
    """

    action_id: int
    kind: ActionKind
    direction: Vector3
    velocity: float
    start_time: float
    name: str = field(default="", compare=False)
    duration: Optional[float] = None

    def __post_init__(self):
        d = tuple(float(c) for c in self.direction)
        if len(d) != 3 or abs(math.sqrt(sum(c * c for c in d)) - 1.0) > UNIT_TOL:
            raise ValidationError(f"action direction must be a unit 3-vector, got {self.direction!r}")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "kind", ActionKind(self.kind))
        if not (self.velocity >= 0.0 and math.isfinite(self.velocity)):
            raise ValidationError(f"action velocity must be finite and >= 0, got {self.velocity}")
        if self.duration is not None and self.duration < 0.0:
            raise ValidationError("action duration cannot be negative")

    @property
    def is_rotation(self) -> bool:
        return self.kind == ActionKind.ROTATION

    @classmethod
    def hold(cls, action_id: int = 0, start_time: float = 0.0) -> Action:
        """Zero-velocity action: the object stays where it is."""
        return cls(action_id, ActionKind.ROTATION, (0.0, 0.0, 1.0), 0.0, start_time, name="hold")


@dataclass(frozen=True)
class ControlPacketObject:
    """Pose snapshot of one object plus the action now driving it."""

    object_id: int
    server_timestamp: float
    pose: Pose
    action: Action


@dataclass
class SceneObject:
    object_id: int
    pose: Pose = field(default_factory=Pose)
    active_action: Optional[Action] = None
    lock_holder: Optional[int] = None
    # virtual time at which ``pose`` is exact
    updated_at: float = 0.0
    history: list[Action] = field(default_factory=list)

    def acquire(self, node_id: int) -> bool:
        """First-come-first-served lock; re-acquiring a held lock succeeds."""
        if self.lock_holder is None or self.lock_holder == node_id:
            self.lock_holder = node_id
            return True
        return False

    def release(self, node_id: int) -> bool:
        if self.lock_holder != node_id:
            return False
        self.lock_holder = None
        return True

    def advance(self, now: float) -> Pose:
        """Integrate the active action up to ``now`` and return the pose."""
        if now < self.updated_at:
            raise OrderingError(f"object {self.object_id}: cannot move back from {self.updated_at} to {now}")
        if self.active_action is not None and now > self.updated_at:
            self.pose = apply_action(self.pose, self.active_action, now - self.updated_at)
        self.updated_at = now
        return self.pose

    def install(self, pose: Pose, action: Optional[Action], at: float) -> None:
        """Overwrite pose and action (replica side; no lock check)."""
        self.pose = pose
        self.active_action = action
        self.updated_at = at

    def snapshot(self, now: float) -> ControlPacketObject:
        action = self.active_action if self.active_action is not None else Action.hold(0, now)
        return ControlPacketObject(self.object_id, now, self.advance(now), action)


def begin_action(obj: SceneObject, action: Action, now: float, node_id: int) -> ControlPacketObject:
    """Start ``action`` on ``obj`` at ``now`` on behalf of ``node_id``.

    Closes the previous action's duration, moves the pose to ``now`` under
    the previous action and returns the CPO to broadcast.
    """
    if obj.lock_holder != node_id:
        raise AuthorizationError(f"node {node_id} does not hold the lock of object {obj.object_id}")
    if action.start_time != now:
        raise ValidationError(f"action.start_time {action.start_time} != now {now}")
    prev = obj.active_action
    if prev is not None:
        if now < prev.start_time or (now == prev.start_time and action.action_id <= prev.action_id):
            raise OrderingError(
                f"action {action.action_id} at t={now} does not follow action {prev.action_id} at t={prev.start_time}"
            )
    obj.advance(now)
    if prev is not None:
        closed = replace(prev, duration=now - prev.start_time)
        if obj.history and obj.history[-1] is prev:
            obj.history[-1] = closed
        else:
            obj.history.append(closed)
    obj.active_action = action
    obj.history.append(action)
    return ControlPacketObject(obj.object_id, now, obj.pose, action)


@dataclass
class ActionTrace:
    """Actions applied by nodes to objects, kept in (start_time, action_id) order."""

    entries: list[tuple[int, int, Action]] = field(default_factory=list)
    window: float = DEFAULT_WINDOW

    def add(self, node_id: int, object_id: int, action: Action) -> None:
        self.entries.append((node_id, object_id, action))
        self.entries.sort(key=lambda e: (e[2].start_time, e[2].action_id))

    @classmethod
    def from_actions(cls, node_id: int, object_id: int, actions: Iterable[Action], window: float = DEFAULT_WINDOW):
        trace = cls(window=window)
        for a in actions:
            trace.entries.append((node_id, object_id, a))
        trace.entries.sort(key=lambda e: (e[2].start_time, e[2].action_id))
        return trace


def action_frequency(trace: ActionTrace, m: int, node: int, now: Optional[float] = None) -> float:
    """Average actions per second per object applied by ``node``.

    Counts action initiations in the trailing window ``(now - window, now]``;
    ``now`` defaults to the latest start time in the trace.
    """
    if m < 1:
        raise ValidationError(f"object count must be >= 1, got {m}")
    if not trace.window > 0.0:
        raise ValidationError(f"window must be positive, got {trace.window}")
    if not trace.entries:
        return 0.0
    if now is None:
        now = trace.entries[-1][2].start_time
    lo = now - trace.window
    count = sum(1 for k, _, a in trace.entries if k == node and lo < a.start_time <= now)
    return count / (m * trace.window)


def peak_action_frequency(trace: ActionTrace, m: int, node: int) -> float:
    """Largest trailing-window frequency seen at any action initiation."""
    if not trace.entries:
        return action_frequency(trace, m, node)
    return max(action_frequency(trace, m, node, a.start_time) for _, _, a in trace.entries)


def upshot_frequency(delta: float) -> float:
    """Actions per second a link of one-way delay ``delta`` can keep up with."""
    if not delta > 0.0:
        raise ValidationError(f"delay must be positive, got {delta}")
    return 1.0 / delta


class FrequencyClass(enum.Enum):
    LOW = "LOW"
    HIGH = "HIGH"


def classify(nu_k: float, nu_0: float) -> FrequencyClass:
    if nu_k < 0 or nu_0 < 0:
        raise ValidationError("frequencies must be non-negative")
    return FrequencyClass.LOW if nu_k < nu_0 else FrequencyClass.HIGH


@dataclass(frozen=True)
class FrequencyReport:
    nu_k: float
    nu_0: float
    classification: FrequencyClass

    @classmethod
    def build(cls, nu_k: float, nu_0: float) -> FrequencyReport:
        return cls(nu_k, nu_0, classify(nu_k, nu_0))
