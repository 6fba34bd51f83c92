"""Scenario configuration and its flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..errors import ValidationError
from ..net.sim import Jitter
from ..runtime import DEFAULT_T_FRAME, NoSyncBaseline, ProbeMode
from ..scene import DEFAULT_WINDOW
from ..sync import DEFAULT_HISTORY, GAMMA_MAX, GAMMA_MIN, GAMMA_START


@dataclass(frozen=True)
class ScenarioConfig:
    """One experiment: ``node_count - 1`` clients watching a server rotate one object.

    Delays and durations are seconds, velocities degrees/second.
    ``tick_offsets`` shifts each node's render-tick phase (index = node id)
    to model heterogeneous hardware. ``delay_step_time`` / ``delay_step_to``
    only matter for the probe demo: at that time after probing starts the
    link's base delay jumps to the new value.
    """

    seed: Optional[int] = None
    node_count: int = 2
    base_delay: float = 0.00075
    jitter: Jitter = Jitter()
    action_velocities: tuple[float, ...] = (10.0, 50.0, 100.0)
    action_count: int = 24
    duration_min: float = 0.25
    duration_max: float = 2.0
    sync_enabled: bool = True
    nosync_baseline: NoSyncBaseline = NoSyncBaseline.POSE
    probe_mode: ProbeMode = ProbeMode.ADAPTIVE
    t_frame: float = DEFAULT_T_FRAME
    tick_offsets: tuple[float, ...] = ()
    history_size: int = DEFAULT_HISTORY
    gamma_min: float = GAMMA_MIN
    gamma_max: float = GAMMA_MAX
    gamma_start: float = GAMMA_START
    frequency_window: float = DEFAULT_WINDOW
    lead_time: float = 0.5
    probe_duration: float = 60.0
    delay_step_time: Optional[float] = None
    delay_step_to: Optional[float] = None
    output: Optional[str] = None

    def validate(self, need_seed: bool = True) -> ScenarioConfig:
        if need_seed and self.seed is None:
            raise ValidationError("a seed is required")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.node_count < 2:
            raise ValidationError("node_count must be >= 2 (server plus at least one client)")
        if not self.base_delay > 0:
            raise ValidationError("base_delay must be positive")
        if not self.action_velocities or any(not (v > 0 and math.isfinite(v)) for v in self.action_velocities):
            raise ValidationError("action_velocities must be a non-empty list of positive numbers")
        if self.action_count < 1:
            raise ValidationError("action_count must be >= 1")
        if not 0 < self.duration_min <= self.duration_max:
            raise ValidationError("need 0 < duration_min <= duration_max")
        if not self.t_frame > 0:
            raise ValidationError("t_frame must be positive")
        if len(self.tick_offsets) > self.node_count:
            raise ValidationError("more tick_offsets than nodes")
        if any(not 0 <= o < self.t_frame for o in self.tick_offsets):
            raise ValidationError("tick offsets must lie in [0, t_frame)")
        if not 0 < self.gamma_min <= self.gamma_start <= self.gamma_max:
            raise ValidationError("need 0 < gamma_min <= gamma_start <= gamma_max")
        if self.history_size < 1 or self.frequency_window <= 0 or self.lead_time < 0 or self.probe_duration <= 0:
            raise ValidationError("history_size, frequency_window, lead_time and probe_duration out of range")
        if (self.delay_step_time is None) != (self.delay_step_to is None):
            raise ValidationError("delay_step_time and delay_step_to go together")
        if self.delay_step_to is not None and self.delay_step_to < 0:
            raise ValidationError("delay_step_to must be non-negative")
        return self

    def offset(self, node_id: int) -> float:
        return self.tick_offsets[node_id] if node_id < len(self.tick_offsets) else 0.0

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.replace(" ", "").split(",") if p)


def _opt_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


_PARSERS = {
    "seed": lambda s: int(s, 0),
    "node_count": int,
    "base_delay": float,
    "jitter": Jitter.parse,
    "action_velocities": _floats,
    "action_count": int,
    "duration_min": float,
    "duration_max": float,
    "sync_enabled": _bool,
    "nosync_baseline": lambda s: NoSyncBaseline(s.strip().upper()),
    "probe_mode": lambda s: ProbeMode(s.strip().upper()),
    "t_frame": float,
    "tick_offsets": _floats,
    "history_size": int,
    "gamma_min": float,
    "gamma_max": float,
    "gamma_start": float,
    "frequency_window": float,
    "lead_time": float,
    "probe_duration": float,
    "delay_step_time": _opt_float,
    "delay_step_to": _opt_float,
    "output": str.strip,
}
assert set(_PARSERS) == {f.name for f in dataclasses.fields(ScenarioConfig)}


def parse_config(text: str) -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if key not in _PARSERS:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value.strip())
        except (ValueError, ValidationError) as exc:
            raise ValidationError(f"line {lineno}: bad value for {key}: {exc}") from None
    return ScenarioConfig(**values)


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: ScenarioConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            if f.name in ("seed", "output"):
                continue
            text = "none"
        elif isinstance(v, tuple):
            text = ", ".join(repr(x) for x in v)
        elif isinstance(v, (ProbeMode, NoSyncBaseline)):
            text = v.value
        elif isinstance(v, (Jitter, str)):
            text = str(v)
        else:
            text = repr(v)
        lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
