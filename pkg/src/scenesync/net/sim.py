"""Deterministic discrete-event network simulator.

Latency jitter comes from numpy's PCG64 generator. Each directed link keeps
one independent stream per message type, derived with
``SeedSequence(seed, spawn_key=(src, dst, msg_type))``, so adding or removing
probe traffic never shifts the jitter seen by CPO broadcasts. Runs with the
same seed are bit-identical on every platform numpy supports.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from ..errors import ValidationError
from .wire import Message, encode


class JitterKind(enum.Enum):
    NONE = "none"
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class Jitter:
    """``width`` is the half-width for UNIFORM and the sigma for GAUSSIAN."""

    kind: JitterKind = JitterKind.NONE
    width: float = 0.0

    def __post_init__(self):
        if self.width < 0:
            raise ValidationError("jitter width must be non-negative")

    @classmethod
    def parse(cls, text: str) -> Jitter:
        """Parse ``none``, ``uniform:<half_width>`` or ``gaussian:<sigma>`` (seconds)."""
        name, _, arg = text.strip().lower().partition(":")
        try:
            kind = JitterKind(name)
        except ValueError:
            raise ValidationError(f"unknown jitter model {text!r}") from None
        if kind is JitterKind.NONE:
            return cls()
        try:
            return cls(kind, float(arg))
        except ValueError:
            raise ValidationError(f"bad jitter width in {text!r}") from None

    def __str__(self):
        if self.kind is JitterKind.NONE:
            return "none"
        return f"{self.kind.value}:{self.width!r}"

    def scaled(self, factor: float) -> Jitter:
        return Jitter(self.kind, self.width * factor)

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind is JitterKind.NONE or self.width == 0.0:
            return 0.0
        if self.kind is JitterKind.UNIFORM:
            return float(rng.uniform(-self.width, self.width))
        while True:  # truncated at +/- 3 sigma
            x = float(rng.normal(0.0, self.width))
            if abs(x) <= 3.0 * self.width:
                return x


@dataclass(frozen=True)
class LinkModel:
    base_delay: float
    jitter: Jitter = Jitter()
    seed: int = 0

    def __post_init__(self):
        if self.base_delay < 0:
            raise ValidationError("base delay must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")


class SimLink:
    """State of one directed link: jitter streams and the FIFO clamp."""

    def __init__(self, model: LinkModel, src: int, dst: int):
        self.model = model
        self.src = src
        self.dst = dst
        self.last_delivery = float("-inf")
        self._streams: dict[int, np.random.Generator] = {}

    def _stream(self, msg_type: int) -> np.random.Generator:
        rng = self._streams.get(msg_type)
        if rng is None:
            ss = np.random.SeedSequence(self.model.seed, spawn_key=(self.src, self.dst, int(msg_type)))
            rng = self._streams[msg_type] = np.random.Generator(np.random.PCG64(ss))
        return rng

    def sample_latency(self, msg_type: int) -> float:
        j = self.model.jitter.sample(self._stream(msg_type))
        return max(0.0, self.model.base_delay + j)


@dataclass(order=True)
class Event:
    time: float
    seq: int
    label: str = field(compare=False)
    fn: Optional[Callable[..., Any]] = field(compare=False, default=None)
    args: tuple = field(compare=False, default=())
    cancelled: bool = field(compare=False, default=False)

    def cancel(self) -> None:
        self.cancelled = True


class SimClock:
    """Virtual clock plus time-ordered event queue (FIFO among equal times)."""

    def __init__(self, start: float = 0.0):
        self.now = start
        self._queue: list[Event] = []
        self._seq = itertools.count()

    def __len__(self):
        return len(self._queue)

    def schedule(self, time: float, fn: Optional[Callable[..., Any]] = None, *args, label: str = "") -> Event:
        if time < self.now:
            raise ValidationError(f"cannot schedule at {time} < now {self.now}")
        ev = Event(time, next(self._seq), label, fn, args)
        heapq.heappush(self._queue, ev)
        return ev

    def peek(self) -> Optional[float]:
        while self._queue and self._queue[0].cancelled:
            heapq.heappop(self._queue)
        return self._queue[0].time if self._queue else None

    def run_until(self, t: float) -> list[Event]:
        """Dispatch every event with timestamp <= ``t``; leaves ``now == t``."""
        if t < self.now:
            raise ValidationError(f"cannot run backwards to {t} from {self.now}")
        done = []
        while self._queue and self._queue[0].time <= t:
            ev = heapq.heappop(self._queue)
            if ev.cancelled:
                continue
            self.now = ev.time
            if ev.fn is not None:
                ev.fn(*ev.args)
            done.append(ev)
        self.now = t
        return done


def sim_send(
    clock: SimClock,
    link: SimLink,
    msg: Message,
    send_time: float,
    deliver: Optional[Callable[[bytes, float], Any]] = None,
) -> Event:
    """Schedule delivery of ``msg`` over ``link``.

    Delivery happens at ``send_time + latency``, but never before the previous
    delivery on the same link, which keeps every link FIFO.
    """
    if send_time < clock.now:
        raise ValidationError(f"send_time {send_time} is in the past (now {clock.now})")
    data = encode(msg)
    at = max(send_time + link.sample_latency(msg.msg_type), link.last_delivery)
    link.last_delivery = at
    label = f"{link.src}->{link.dst} {msg.msg_type.name}"
    if deliver is None:
        return clock.schedule(at, None, label=label)
    return clock.schedule(at, deliver, data, at, label=label)


def sim_run_until(clock: SimClock, t: float) -> list[Event]:
    return clock.run_until(t)


@dataclass(frozen=True)
class Delivery:
    time: float
    src: int
    dst: int
    data: bytes


class SimNetwork:
    """Star network of nodes exchanging encoded datagrams on one SimClock."""

    def __init__(self, clock: SimClock, default: LinkModel):
        self.clock = clock
        self.default = default
        self.links: dict[tuple[int, int], SimLink] = {}
        self.handlers: dict[int, Callable[[bytes, float], Any]] = {}
        self.trace: list[Delivery] = []

    def attach(self, node_id: int, handler: Callable[[bytes, float], Any]) -> None:
        self.handlers[node_id] = handler

    def link(self, src: int, dst: int) -> SimLink:
        key = (src, dst)
        if key not in self.links:
            self.links[key] = SimLink(self.default, src, dst)
        return self.links[key]

    def set_model(self, model: LinkModel) -> None:
        """Swap the link model on every link, keeping jitter streams and FIFO state."""
        self.default = model
        for link in self.links.values():
            link.model = model

    def send(self, src: int, dst: int, msg: Message, at: Optional[float] = None) -> Event:
        t = self.clock.now if at is None else at

        def deliver(data: bytes, when: float) -> None:
            self.trace.append(Delivery(when, src, dst, data))
            self.handlers[dst](data, when)

        return sim_send(self.clock, self.link(src, dst), msg, t, deliver)
