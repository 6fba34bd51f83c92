"""Simulated sessions and the random-rotation drift experiment."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import JoinError
from ..geometry import drift_angle
from ..net.sim import Event, LinkModel, SimClock, SimNetwork
from ..net.wire import decode
from ..runtime import SERVER_ID, ClientNode, Outbound, ServerNode
from ..scene import Action, ActionKind, ActionTrace, FrequencyClass, FrequencyReport, peak_action_frequency, upshot_frequency
from .config import ScenarioConfig

log = logging.getLogger(__name__)

OBJECT_ID = 0
CSV_HEADER = ("sample_index", "node_id", "velocity_dps", "alpha_deg", "virtual_time_s")
_AXES = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


class SimSession:
    """A server and its clients wired through a :class:`SimNetwork`."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.clock = SimClock()
        self.net = SimNetwork(self.clock, LinkModel(cfg.base_delay, cfg.jitter, cfg.seed or 0))
        self.server = ServerNode(SERVER_ID)
        self.server.acquire(OBJECT_ID)
        self.clients = [
            ClientNode(
                k,
                sync_enabled=cfg.sync_enabled,
                baseline=cfg.nosync_baseline,
                probe_mode=cfg.probe_mode,
                history_size=cfg.history_size,
                gamma_min=cfg.gamma_min,
                gamma_max=cfg.gamma_max,
                gamma_start=cfg.gamma_start,
            )
            for k in range(1, cfg.node_count)
        ]
        self.nodes = {SERVER_ID: self.server, **{c.node_id: c for c in self.clients}}
        self._timers: dict[int, Optional[Event]] = {}
        for node_id, node in self.nodes.items():
            self.net.attach(node_id, self._receiver(node))
            self._schedule_tick(node_id, 0)
        for c in self.clients:
            self.send(c.node_id, c.start(self.clock.now))
            self._arm(c)

    # -- plumbing ---------------------------------------------------------

    def send(self, src: int, out: Outbound) -> None:
        for dst, msg in out:
            self.net.send(src, dst, msg)

    def _receiver(self, node):
        def receive(data: bytes, now: float) -> None:
            out = node.handle(decode(data), now)
            self.send(node.node_id, out)
            if isinstance(node, ClientNode):
                self._arm(node)

        return receive

    def _arm(self, client: ClientNode) -> None:
        deadline = client.next_deadline()
        current = self._timers.get(client.node_id)
        if current is not None and not current.cancelled and deadline == current.time:
            return
        if current is not None:
            current.cancel()
        if deadline is None:
            self._timers[client.node_id] = None
            return
        when = max(deadline, self.clock.now)
        self._timers[client.node_id] = self.clock.schedule(when, self._fire, client, label=f"timer {client.node_id}")

    def _fire(self, client: ClientNode) -> None:
        self._timers[client.node_id] = None
        self.send(client.node_id, client.on_timer(self.clock.now))
        self._arm(client)

    def tick_time(self, node_id: int, index: int) -> float:
        return index * self.cfg.t_frame + self.cfg.offset(node_id)

    def _schedule_tick(self, node_id: int, index: int) -> None:
        self.clock.schedule(self.tick_time(node_id, index), self._tick, node_id, index, label=f"tick {node_id}")

    def _tick(self, node_id: int, index: int) -> None:
        self.nodes[node_id].render_tick(self.clock.now)
        self._schedule_tick(node_id, index + 1)

    # -- control ----------------------------------------------------------

    def run_until(self, t: float) -> None:
        self.clock.run_until(t)

    def wait_ready(self, timeout: float = 30.0) -> float:
        """Advance until every client finished its bootstrap probes; returns that time."""
        limit = self.clock.now + timeout
        step = self.cfg.t_frame
        while not all(c.ready for c in self.clients):
            if self.clock.now >= limit:
                raise JoinError("clients did not finish joining in time")
            self.run_until(min(limit, self.clock.now + step))
        return self.clock.now


@dataclass(frozen=True)
class DriftSample:
    sample_index: int
    node_id: int
    velocity: float
    alpha: float
    virtual_time: float


@dataclass(frozen=True)
class ScheduledAction:
    tick: int
    axis: int
    sign: int
    velocity: float


def build_schedule(cfg: ScenarioConfig) -> list[ScheduledAction]:
    """Random rotations: axis in {x, y, z}, random sign, tick-quantized duration.

    ``tick`` is the offset in server frames from the first action. The draws
    do not depend on the velocities, so runs that differ only in velocity see
    the same axes and durations.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed or 0, spawn_key=(0x5C,))))
    out, tick = [], 0
    for v in cfg.action_velocities:
        for _ in range(cfg.action_count):
            axis = int(rng.integers(3))
            sign = 1 if rng.random() < 0.5 else -1
            duration = float(rng.uniform(cfg.duration_min, cfg.duration_max))
            out.append(ScheduledAction(tick, axis, sign, float(v)))
            tick += max(1, round(duration / cfg.t_frame))
    # a final hold action closes the last motion and triggers its sample
    out.append(ScheduledAction(tick, 2, 1, 0.0))
    return out


def schedule_actions(cfg: ScenarioConfig, start: float = 0.0) -> list[Action]:
    acts = []
    for i, s in enumerate(build_schedule(cfg), 1):
        t = start + s.tick * cfg.t_frame
        d = tuple(s.sign * c for c in _AXES[s.axis])
        acts.append(Action(i, ActionKind.ROTATION, d, s.velocity, t, name=f"rot{'xyz'[s.axis]}{'+' if s.sign > 0 else '-'}"))
    return acts


def classify_schedule(cfg: ScenarioConfig) -> FrequencyReport:
    acts = [a for a in schedule_actions(cfg) if a.velocity > 0]
    trace = ActionTrace.from_actions(SERVER_ID, OBJECT_ID, acts, window=cfg.frequency_window)
    nu_k = peak_action_frequency(trace, 1, SERVER_ID)
    return FrequencyReport.build(nu_k, upshot_frequency(cfg.base_delay))


@dataclass
class ScenarioResult:
    cfg: ScenarioConfig
    samples: list[DriftSample]
    frequency: FrequencyReport
    session: SimSession

    def alphas(self, node_id: Optional[int] = None, velocity: Optional[float] = None) -> list[float]:
        return [
            s.alpha
            for s in self.samples
            if (node_id is None or s.node_id == node_id) and (velocity is None or s.velocity == velocity)
        ]

    def mean_alpha(self, node_id: Optional[int] = None, velocity: Optional[float] = None) -> float:
        a = self.alphas(node_id, velocity)
        return math.fsum(a) / len(a) if a else 0.0

    def max_alpha(self, node_id: Optional[int] = None, velocity: Optional[float] = None) -> float:
        return max(self.alphas(node_id, velocity), default=0.0)

    def per_node_means(self, velocity: Optional[float] = None) -> dict[int, float]:
        return {c.node_id: self.mean_alpha(c.node_id, velocity) for c in self.session.clients}

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in self.samples:
            w.writerow((s.sample_index, s.node_id, repr(s.velocity), repr(s.alpha), repr(s.virtual_time)))
        return buf.getvalue()

    def summary(self) -> dict[str, str]:
        cfg = self.cfg
        out = {
            "seed": str(cfg.seed),
            "node_count": str(cfg.node_count),
            "base_delay_s": repr(cfg.base_delay),
            "jitter": str(cfg.jitter),
            "sync_enabled": str(cfg.sync_enabled).lower(),
            "probe_mode": cfg.probe_mode.value,
            "nu_k": repr(self.frequency.nu_k),
            "nu_0": repr(self.frequency.nu_0),
            "classification": self.frequency.classification.value,
            "samples": str(len(self.samples)),
        }
        for c in self.session.clients:
            for v in cfg.action_velocities:
                key = f"node{c.node_id}.v{v:g}"
                out[f"{key}.max_alpha_deg"] = repr(self.max_alpha(c.node_id, v))
                out[f"{key}.mean_alpha_deg"] = repr(self.mean_alpha(c.node_id, v))
            out[f"node{c.node_id}.probes"] = str(c.probes_sent)
            out[f"node{c.node_id}.T_n_s"] = repr(c.T_n)
        return out

    def summary_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.summary().items())

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        csv_path, summary_path = d / "drift.csv", d / "summary.txt"
        csv_path.write_text(self.csv_text())
        summary_path.write_text(self.summary_text())
        return csv_path, summary_path


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Run the rotation experiment and sample drift at every action initiation.

    Sample ``k`` is taken when action ``k + 1`` starts and therefore
    measures the state reached under action ``k``; it is tagged with action
    ``k``'s velocity. Results stay in memory and are written at most once,
    at the end, when ``cfg.output`` is set.
    """
    cfg.validate()
    freq = classify_schedule(cfg)
    if freq.classification is FrequencyClass.HIGH:
        log.warning(
            "action frequency %.3g/s >= upshot frequency %.3g/s: outside the low-frequency regime",
            freq.nu_k, freq.nu_0,
        )
    session = SimSession(cfg)
    ready = session.wait_ready()

    server = session.server
    first_tick = math.ceil((ready + cfg.lead_time - cfg.offset(SERVER_ID)) / cfg.t_frame)
    samples: list[DriftSample] = []
    prev: Optional[Action] = None
    for i, s in enumerate(build_schedule(cfg), 1):
        t = session.tick_time(SERVER_ID, first_tick + s.tick)
        session.run_until(t)
        if prev is not None:
            q_s = server.scene[OBJECT_ID].advance(t).orientation
            for c in session.clients:
                alpha = drift_angle(q_s, c.pose(OBJECT_ID).orientation)
                samples.append(DriftSample(i - 1, c.node_id, prev.velocity, alpha, t))
        d = tuple(s.sign * c for c in _AXES[s.axis])
        action = Action(i, ActionKind.ROTATION, d, s.velocity, t)
        session.send(SERVER_ID, server.user_action(OBJECT_ID, action, t))
        prev = action
    session.run_until(session.clock.now + 1.0)

    result = ScenarioResult(cfg, samples, freq, session)
    if cfg.output:
        result.write(cfg.output)
    return result
