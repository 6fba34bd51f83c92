"""The probe rate backs off on a quiet link and surges after a delay step."""

from scenesync.harness import ScenarioConfig, probe_demo
from scenesync.runtime import ProbeMode

base = ScenarioConfig(seed=3, base_delay=0.0015, probe_duration=60.0)

fixed = probe_demo(base.replace(probe_mode=ProbeMode.FIXED))
quiet = probe_demo(base)
print(f"60 s of probing: fixed {fixed.probes_sent} pings, adaptive {quiet.probes_sent} pings")

step = probe_demo(base.replace(delay_step_time=30.0, delay_step_to=0.005))
first_after = step.after_step()[0]
for rec in step.records:
    marker = "  <- first probe after the step" if rec is first_after else ""
    print(f"t={rec.time - step.start_time:6.2f}s  h0={rec.h0 * 1e3:5.2f} ms  gamma={rec.gamma_0:5.2f}/s{marker}")
