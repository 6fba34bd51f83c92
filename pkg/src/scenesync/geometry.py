"""Quaternion algebra, constant-velocity pose integration and drift angles.

Quaternions are stored scalar-first, ``(w, x, y, z)``, and compose with the
Hamilton product: ``quat_mul(a, b)`` is the rotation that applies ``b`` first
and then ``a``. Angles cross this module's boundary in degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .errors import ValidationError

if TYPE_CHECKING:
    from .scene import Action

UNIT_TOL = 1e-9

Vector3 = tuple[float, float, float]


@dataclass(frozen=True)
class Quaternion:
    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def identity(cls) -> Quaternion:
        return cls(1.0, 0.0, 0.0, 0.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    def norm(self) -> float:
        return math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> Quaternion:
        n = self.norm()
        if n < 1e-300:
            raise ValidationError("cannot normalize a zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def __neg__(self) -> Quaternion:
        return Quaternion(-self.w, -self.x, -self.y, -self.z)


@dataclass(frozen=True)
class Pose:
    """Rigid pose: position in meters plus a unit orientation."""

    position: Vector3 = (0.0, 0.0, 0.0)
    orientation: Quaternion = Quaternion()

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.position):
            raise ValidationError(f"non-finite position {self.position}")
        if abs(self.orientation.norm() - 1.0) > 1e-6:
            raise ValidationError("pose orientation must be a unit quaternion")


def _check_unit_vector(v: Sequence[float], what: str) -> Vector3:
    if len(v) != 3:
        raise ValidationError(f"{what} must have 3 components, got {len(v)}")
    x, y, z = (float(c) for c in v)
    if abs(math.sqrt(x * x + y * y + z * z) - 1.0) > UNIT_TOL:
        raise ValidationError(f"{what} must be unit length, got {v!r}")
    return (x, y, z)


def quat_from_axis_angle(axis: Sequence[float], angle: float) -> Quaternion:
    """Rotation of ``angle`` degrees about the unit vector ``axis``."""
    ax, ay, az = _check_unit_vector(axis, "axis")
    if not math.isfinite(angle):
        raise ValidationError(f"angle must be finite, got {angle}")
    half = math.radians(angle) / 2.0
    s = math.sin(half)
    return Quaternion(math.cos(half), s * ax, s * ay, s * az).normalized()


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product ``a * b``, renormalized."""
    w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z
    x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y
    y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x
    z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w
    return Quaternion(w, x, y, z).normalized()


def quat_inverse(q: Quaternion) -> Quaternion:
    return Quaternion(q.w, -q.x, -q.y, -q.z)


def correction_quaternion(q_s: Quaternion, q_c: Quaternion) -> Quaternion:
    """Quaternion ``q_e`` with ``q_s = q_e * q_c``."""
    return quat_mul(q_s, quat_inverse(q_c))


def drift_angle(q_s: Quaternion, q_c: Quaternion) -> float:
    """Angle in degrees, in [0, 180], separating two orientations.

    The correction quaternion is sign-flipped onto the ``w >= 0`` hemisphere
    so that ``q`` and ``-q`` give the same answer. The half angle is then
    taken with ``atan2(|v|, w)``, which equals ``acos(w)`` for a unit
    quaternion but keeps full precision near zero drift, where ``acos``
    loses about eight digits.
    """
    q_e = correction_quaternion(q_s, q_c)
    w, x, y, z = q_e.as_tuple()
    if w < 0.0:
        w, x, y, z = -w, -x, -y, -z
    w = min(1.0, max(-1.0, w))
    vnorm = math.sqrt(x * x + y * y + z * z)
    return math.degrees(2.0 * math.atan2(vnorm, w))


def displace(pose: Pose, action: Action, amount: float) -> Pose:
    """Move ``pose`` by ``amount`` (degrees or meters) along ``action``.

    Rotations turn the object about its own (body) axis.
    """
    if amount == 0.0:
        return pose
    if action.is_rotation:
        step = quat_from_axis_angle(action.direction, amount)
        return Pose(pose.position, quat_mul(pose.orientation, step))
    dx, dy, dz = action.direction
    px, py, pz = pose.position
    return Pose((px + dx * amount, py + dy * amount, pz + dz * amount), pose.orientation)


def apply_action(pose: Pose, action: Action, dt: float) -> Pose:
    """Advance ``pose`` under ``action`` for ``dt`` seconds at constant velocity."""
    if dt < 0.0:
        raise ValidationError(f"dt must be non-negative, got {dt}")
    if not math.isfinite(action.velocity):
        raise ValidationError("action velocity must be finite")
    return displace(pose, action, action.velocity * dt)
