"""Experiment runner: scenarios, probe demos, scalability metric and CLI."""

from .config import ScenarioConfig, dump_config, load_config, parse_config
from .metrics import ScalabilityReport, classify_trace, psi_from_csvs, psi_metric
from .probes import ProbeDemoResult, probe_demo
from .scenario import DriftSample, ScenarioResult, SimSession, build_schedule, run_scenario

__all__ = [
    "DriftSample", "ProbeDemoResult", "ScalabilityReport", "ScenarioConfig", "ScenarioResult", "SimSession",
    "build_schedule", "classify_trace", "dump_config", "load_config", "parse_config", "probe_demo",
    "psi_from_csvs", "psi_metric", "run_scenario",
]
