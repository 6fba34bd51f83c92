"""Command line entry point: ``scenesync run|classify|probe-demo|psi``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from ..errors import SceneSyncError
from .config import load_config
from .metrics import classify_trace, psi_from_csvs
from .probes import probe_demo
from .scenario import run_scenario


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    out = args.out or cfg.output
    if out is None:
        raise SceneSyncError("no output directory: pass --out or set 'output' in the config")
    freq = classify_trace(cfg)
    print(f"nu_k = {freq.nu_k:.6g} actions/s, nu_0 = {freq.nu_0:.6g} actions/s -> {freq.classification.value}")
    result = run_scenario(cfg.replace(output=None))
    csv_path, summary_path = result.write(out)
    print(f"wrote {csv_path} and {summary_path}")
    for v in cfg.action_velocities:
        print(f"v={v:g} deg/s  mean alpha {result.mean_alpha(velocity=v):.6g} deg  max {result.max_alpha(velocity=v):.6g} deg")
    return 0


def _cmd_classify(args) -> int:
    cfg = load_config(args.config)
    r = classify_trace(cfg)
    print(f"nu_k = {r.nu_k:.6g}")
    print(f"nu_0 = {r.nu_0:.6g}")
    print(f"classification = {r.classification.value}")
    return 0


def _cmd_probe_demo(args) -> int:
    cfg = load_config(args.config)
    result = probe_demo(cfg)
    path = result.write(args.out)
    print(f"wrote {path}: {result.probes_sent} periodic probes, final gamma_0 = {result.final_gamma:g}/s")
    return 0


def _cmd_psi(args) -> int:
    report = psi_from_csvs(args.inputs, args.velocity)
    for i, v in sorted(report.psi.items()):
        print(f"psi_{i} = {v:.6g} deg")
    if report.ratio is not None:
        n = report.largest
        print(f"psi_{n}/psi_1 = {report.ratio:.4g}")
        print(f"low-scalability bound {n}*psi_1 = {report.low_scalability_bound():.6g} deg")
        if report.verdict:
            print(f"scalability = {report.verdict}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scenesync", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a drift experiment")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=lambda s: int(s, 0))
    run.add_argument("--out")
    run.set_defaults(func=_cmd_run)

    cls = sub.add_parser("classify", help="report the LOW/HIGH frequency class of a scenario")
    cls.add_argument("--config", required=True)
    cls.set_defaults(func=_cmd_classify)

    pd = sub.add_parser("probe-demo", help="record the adaptive probe rate over time")
    pd.add_argument("--config", required=True)
    pd.add_argument("--out", required=True)
    pd.set_defaults(func=_cmd_probe_demo)

    psi = sub.add_parser("psi", help="scalability metric from drift CSVs")
    psi.add_argument("--inputs", nargs="+", required=True)
    psi.add_argument("--velocity", type=float, help="only use samples at this velocity (deg/s)")
    psi.set_defaults(func=_cmd_psi)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (SceneSyncError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
