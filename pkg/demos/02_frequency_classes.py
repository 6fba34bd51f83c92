"""Low versus high action frequency for a few link delays."""

from scenesync.harness import ScenarioConfig, classify_trace
from scenesync.scene import Action, ActionKind, ActionTrace, upshot_frequency

for delta in (0.1, 0.24, 0.00075):
    print(f"one-way delay {delta * 1e3:g} ms -> upshot frequency {upshot_frequency(delta):.2f} actions/s")

# the default rotation schedule: at most four new actions per second
gui = ScenarioConfig(seed=0)
print("GUI-like schedule on a LAN:", classify_trace(gui))

# a 60 Hz tracker pushes one action per frame
frames = [Action(i, ActionKind.TRANSLATION, (1.0, 0.0, 0.0), 0.1, i / 60) for i in range(1, 61)]
tracker = ActionTrace.from_actions(0, 0, frames, window=1.0)
print("60 Hz tracker over 100 ms:", classify_trace(tracker, delta=0.1))
