"""Latency-compensated scene synchronization for shared virtual scenes."""

from .errors import (
    AuthorizationError,
    EncodingError,
    JoinError,
    OrderingError,
    ProtocolError,
    SceneSyncError,
    TransportError,
    ValidationError,
)
from .geometry import Pose, Quaternion, apply_action, drift_angle, quat_from_axis_angle, quat_inverse, quat_mul
from .scene import (
    Action,
    ActionKind,
    ActionTrace,
    ControlPacketObject,
    FrequencyClass,
    FrequencyReport,
    SceneObject,
    action_frequency,
    begin_action,
    classify,
    upshot_frequency,
)
from .sync import (
    DelayHistory,
    DriftMatrix,
    DriftVector,
    adapt_probe_rate,
    correct_pose,
    drift_matrix,
    drift_value,
    record_delay,
    rtt_to_delay,
)
from .runtime import ClientNode, NoSyncBaseline, ProbeMode, ServerNode

__version__ = "0.1.0"
