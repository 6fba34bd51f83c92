"""Drift angle between two orientations, and how a delay turns into drift."""

import numpy as np

from scenesync.geometry import Pose, apply_action, drift_angle, quat_from_axis_angle
from scenesync.scene import Action, ActionKind

# two orientations around the same axis differ by the plain angle difference
a = quat_from_axis_angle((0, 0, 1), 90)
b = quat_from_axis_angle((0, 0, 1), 60)
print("alpha(90 deg, 60 deg about z) =", drift_angle(a, b))

# q and -q are the same rotation, so they give the same answer
print("sign flip:", drift_angle(a, b), drift_angle(-a, b))

# a client that starts a 100 deg/s spin 1.5 ms late lags by 0.15 deg
spin = Action(1, ActionKind.ROTATION, (0.0, 0.0, 1.0), 100.0, 0.0)
server = apply_action(Pose(), spin, 1.0)
client = apply_action(Pose(), spin, 1.0 - 0.0015)
print("lag after one second:", drift_angle(server.orientation, client.orientation))

# random pairs: the angle never exceeds 180 deg
rng = np.random.default_rng(0)
angles = []
for _ in range(5):
    axes = rng.normal(size=(2, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    qa = quat_from_axis_angle(tuple(axes[0]), rng.uniform(-180, 180))
    qb = quat_from_axis_angle(tuple(axes[1]), rng.uniform(-180, 180))
    angles.append(drift_angle(qa, qb))
print("random pairs:", np.round(angles, 3))
