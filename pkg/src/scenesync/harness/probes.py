"""Probe-rate demonstration: how the probe rate follows link stability."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..net.sim import LinkModel
from ..runtime import ProbeRecord
from .config import ScenarioConfig
from .scenario import SimSession

CSV_HEADER = ("time_s", "h0_s", "h_mean_s", "sigma_s", "gamma_0")


@dataclass
class ProbeDemoResult:
    cfg: ScenarioConfig
    records: list[ProbeRecord]  # periodic probes only, bootstrap excluded
    boot_records: list[ProbeRecord]
    probes_sent: int
    start_time: float
    step_at: Optional[float]

    def after_step(self) -> list[ProbeRecord]:
        if self.step_at is None:
            return []
        return [r for r in self.records if r.time >= self.step_at]

    @property
    def final_gamma(self) -> float:
        recs = self.records or self.boot_records
        return recs[-1].gamma_0

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.boot_records + self.records:
            w.writerow((repr(r.time), repr(r.h0), repr(r.h_mean), repr(r.sigma), repr(r.gamma_0)))
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> Path:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        path = d / "probes.csv"
        path.write_text(self.csv_text())
        return path


def probe_demo(cfg: ScenarioConfig) -> ProbeDemoResult:
    """Probe a single client link for ``cfg.probe_duration`` seconds after bootstrap.

    No actions are applied. If ``delay_step_time`` is set, the base delay
    switches to ``delay_step_to`` that many seconds after probing starts.
    """
    cfg = cfg.replace(node_count=2).validate(need_seed=False)
    session = SimSession(cfg)
    start = session.wait_ready()
    client = session.clients[0]
    n_boot = len(client.probe_log)
    sent_at_start = client.probes_sent

    step_at = None
    if cfg.delay_step_time is not None:
        step_at = start + cfg.delay_step_time
        stepped = LinkModel(cfg.delay_step_to, cfg.jitter, cfg.seed or 0)
        session.clock.schedule(step_at, session.net.set_model, stepped, label="delay step")
    session.run_until(start + cfg.probe_duration)

    return ProbeDemoResult(
        cfg,
        records=client.probe_log[n_boot:],
        boot_records=client.probe_log[:n_boot],
        probes_sent=client.probes_sent - sent_at_start,
        start_time=start,
        step_at=step_at,
    )
