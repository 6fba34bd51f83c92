"""Latency compensation: drift values, the drift matrix and adaptive delay probing."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .geometry import Pose, displace
from .scene import ControlPacketObject

DEFAULT_HISTORY = 100
GAMMA_MIN = 0.2
GAMMA_MAX = 20.0
GAMMA_START = 1.0
GAMMA_FACTOR = 2.0
# timestamp differences carry float noise; the band is widened by this much
DELAY_RESOLUTION = 1e-9


def drift_value(velocity: float, delay: float) -> float:
    """Pose error (degrees or meters) accrued over ``delay`` at ``velocity``."""
    if delay < 0.0:
        raise ValidationError(f"delay must be non-negative, got {delay}")
    return velocity * delay


@dataclass(frozen=True)
class DriftVector:
    node_id: int
    entries: Mapping[int, float]
    measured_delay: float

    @classmethod
    def compute(cls, node_id: int, velocities: Mapping[int, float], delay: float) -> DriftVector:
        return cls(node_id, {j: drift_value(v, delay) for j, v in velocities.items()}, delay)


@dataclass(frozen=True)
class DriftMatrix:
    """``D = S T^t``; column ``k`` is node ``k``'s drift vector."""

    S: np.ndarray
    T: np.ndarray
    D: np.ndarray

    def column(self, k: int) -> np.ndarray:
        return self.D[:, k]


def drift_matrix(S: Sequence[float], T: Sequence[float]) -> DriftMatrix:
    s = np.asarray(S, dtype=float).reshape(-1)
    t = np.asarray(T, dtype=float).reshape(-1)
    if np.any(t < 0):
        raise ValidationError("delays must be non-negative")
    return DriftMatrix(s, t, np.outer(s, t))


def correct_pose(cpo: ControlPacketObject, estimated_delay: float, since_receipt: float = 0.0) -> Pose:
    """Server pose carried by ``cpo``, moved forward by the drift value.

    ``since_receipt`` is local time that already elapsed between receiving
    the CPO and applying it; it is added to the delay estimate.
    """
    if estimated_delay < 0.0 or since_receipt < 0.0:
        raise ValidationError("delays must be non-negative")
    a = cpo.action
    return displace(cpo.pose, a, drift_value(a.velocity, estimated_delay + since_receipt))


def rtt_to_delay(rtt: float) -> float:
    """One-way delay estimate, assuming a symmetric path."""
    if rtt < 0.0:
        raise ValidationError(f"rtt must be non-negative, got {rtt}")
    return rtt / 2.0


@dataclass
class DelayHistory:
    """Sliding window of one-way delay samples and the probe rate it drives."""

    p: int = DEFAULT_HISTORY
    gamma_min: float = GAMMA_MIN
    gamma_max: float = GAMMA_MAX
    gamma_0: float = GAMMA_START
    factor: float = GAMMA_FACTOR
    resolution: float = DELAY_RESOLUTION
    samples: deque = field(default_factory=deque)
    h_mean: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.p < 1:
            raise ValidationError("history size must be >= 1")
        if not 0 < self.gamma_min <= self.gamma_max:
            raise ValidationError("need 0 < gamma_min <= gamma_max")
        if self.factor <= 1.0:
            raise ValidationError("adjustment factor must exceed 1")
        self.gamma_0 = min(max(self.gamma_0, self.gamma_min), self.gamma_max)
        self.samples = deque(self.samples, maxlen=self.p)

    @property
    def full(self) -> bool:
        return len(self.samples) >= self.p

    @property
    def latest(self) -> float:
        return self.samples[-1]

    def in_band(self, h0: float) -> bool:
        spread = self.sigma + self.resolution
        return self.h_mean - spread <= h0 <= self.h_mean + spread


def record_delay(hist: DelayHistory, h0: float) -> DelayHistory:
    """Append ``h0`` (evicting the oldest beyond ``p``) and refresh the statistics."""
    if h0 < 0.0 or not math.isfinite(h0):
        raise ValidationError(f"delay sample must be finite and >= 0, got {h0}")
    hist.samples.append(h0)
    window = np.fromiter(hist.samples, dtype=float, count=len(hist.samples))
    hist.h_mean = float(window.mean())
    hist.sigma = float(window.std())  # population
    return hist


def adapt_probe_rate(hist: DelayHistory, h0: float) -> float:
    """Slow probing down when ``h0`` sits inside mean +/- sigma, speed it up otherwise.

    Until the window holds ``p`` samples the rate is left alone.
    """
    if not hist.full:
        return hist.gamma_0
    if hist.in_band(h0):
        hist.gamma_0 = max(hist.gamma_0 / hist.factor, hist.gamma_min)
    else:
        hist.gamma_0 = min(hist.gamma_0 * hist.factor, hist.gamma_max)
    return hist.gamma_0


def decisions_to_reach(start: float, target: float, factor: float = GAMMA_FACTOR) -> int:
    """Number of multiplicative steps needed to move from ``start`` to ``target``."""
    if start <= 0 or target <= 0:
        raise ValidationError("rates must be positive")
    ratio = max(target / start, start / target)
    return max(0, math.ceil(math.log(ratio, factor) - 1e-12))
