"""Mean drift per client as more clients join the same server."""

from scenesync.harness import ScenarioConfig, psi_metric, run_scenario
from scenesync.net.sim import Jitter

cfg = ScenarioConfig(seed=11, jitter=Jitter.parse("uniform:0.0005"))
runs = {}
for n in (2, 3, 5):
    r = run_scenario(cfg.replace(node_count=n))
    runs[n - 1] = list(r.per_node_means().values())
    print(f"{n} nodes: per-client mean drift", [round(m, 4) for m in runs[n - 1]])

report = psi_metric(runs)
print("psi:", {i: round(v, 4) for i, v in report.psi.items()})
print(f"psi_4 / psi_1 = {report.ratio:.3f}  (low scalability would be near 4)")
print("verdict:", report.verdict)
