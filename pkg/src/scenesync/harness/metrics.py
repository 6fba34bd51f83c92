"""Scalability metric and trace classification."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from ..errors import ValidationError
from ..scene import ActionTrace, FrequencyReport, peak_action_frequency, upshot_frequency
from .config import ScenarioConfig
from .scenario import classify_schedule


def psi_value(per_node_means: Sequence[float]) -> float:
    """Average drift over the client nodes of one run."""
    if not per_node_means:
        raise ValidationError("need at least one client mean")
    return math.fsum(per_node_means) / len(per_node_means)


@dataclass(frozen=True)
class ScalabilityReport:
    """``psi[i]`` is the mean drift with ``i`` clients (``i + 1`` nodes)."""

    psi: Mapping[int, float]

    @property
    def largest(self) -> int:
        return max(self.psi)

    @property
    def ratio(self) -> Optional[float]:
        """``psi_n / psi_1`` for the largest ``n`` present, if ``psi_1`` is known."""
        base = self.psi.get(1)
        if base is None or base == 0:
            return None
        return self.psi[self.largest] / base

    def low_scalability_bound(self, n: Optional[int] = None) -> Optional[float]:
        base = self.psi.get(1)
        return None if base is None else (n or self.largest) * base

    @property
    def verdict(self) -> Optional[str]:
        """``high`` when the ratio sits closer to 1 than to ``n``."""
        r, n = self.ratio, self.largest
        if r is None or n == 1:
            return None
        return "high" if abs(r - 1.0) <= abs(r - n) else "low"


def psi_metric(runs: Mapping[int, Sequence[float]]) -> ScalabilityReport:
    """Build the report from ``{client_count: per-client mean drifts}``."""
    psi = {}
    for i, means in runs.items():
        if i < 1:
            raise ValidationError("client count must be >= 1")
        if len(means) != i:
            raise ValidationError(f"run with {i} clients supplied {len(means)} means")
        psi[i] = psi_value(means)
    if not psi or any(v < 0 for v in psi.values()):
        raise ValidationError("need at least one run with non-negative drifts")
    return ScalabilityReport(psi)


def per_node_means_from_csv(path: str | Path, velocity: Optional[float] = None) -> dict[int, float]:
    sums: dict[int, list[float]] = defaultdict(list)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if velocity is not None and float(row["velocity_dps"]) != velocity:
                continue
            sums[int(row["node_id"])].append(float(row["alpha_deg"]))
    return {k: math.fsum(v) / len(v) for k, v in sorted(sums.items())}


def psi_from_csvs(paths: Iterable[str | Path], velocity: Optional[float] = None) -> ScalabilityReport:
    runs = {}
    for p in paths:
        means = per_node_means_from_csv(p, velocity)
        if not means:
            raise ValidationError(f"{p}: no samples")
        if len(means) in runs:
            raise ValidationError(f"{p}: two inputs with {len(means)} clients")
        runs[len(means)] = list(means.values())
    return psi_metric(runs)


def classify_trace(
    source: ScenarioConfig | ActionTrace, delta: Optional[float] = None, m: int = 1, node: int = 0
) -> FrequencyReport:
    """Compare a schedule's (or a recorded trace's) peak action frequency with
    the upshot frequency of a link with one-way delay ``delta``.

    For a config, ``delta`` defaults to its ``base_delay``.
    """
    if isinstance(source, ScenarioConfig):
        if delta is not None:
            source = source.replace(base_delay=delta)
        return classify_schedule(source.validate(need_seed=False))
    if delta is None:
        raise ValidationError("classifying a recorded trace needs the link delay")
    return FrequencyReport.build(peak_action_frequency(source, m, node), upshot_frequency(delta))
