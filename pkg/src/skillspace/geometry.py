"""Rigid-body geometry: vectors, quaternion rotations, poses, primitive shapes.

Conventions used throughout the package:

- translations in meters, angles in radians
- quaternions ordered (w, x, y, z), unit norm, canonical sign w >= 0
- a Pose maps points from its own frame into the parent frame:
  ``world_point = pose.rotation.apply(local_point) + pose.translation``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

UNIT_TOL = 1e-6


def vec3(x, y=None, z=None) -> np.ndarray:
    """Build a float64 3-vector; accepts three scalars or one 3-sequence."""
    if y is None:
        v = np.asarray(x, dtype=float).reshape(3)
    else:
        v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector components: {v}")
    return v


def unit(v) -> np.ndarray:
    """Normalize a vector; rejects near-zero input."""
    v = vec3(v)
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise ValueError("cannot normalize near-zero vector")
    return v / n


def require_unit(v) -> np.ndarray:
    """Validate that v is unit-norm within UNIT_TOL, then renormalize exactly."""
    v = vec3(v)
    n = np.linalg.norm(v)
    if abs(n - 1.0) > UNIT_TOL:
        raise ValueError(f"expected unit vector, got norm {n:.9g}")
    return v / n


def perpendicular_to(axis) -> np.ndarray:
    """Deterministic unit vector perpendicular to axis.

    Rejection of the global x-axis from the axis, falling back to the global
    y-axis when the axis is (anti)parallel to x.  Total and deterministic so
    degenerate projections stay well defined.
    """
    a = unit(axis)
    for candidate in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        rej = candidate - (candidate @ a) * a
        n = np.linalg.norm(rej)
        if n > 1e-6:
            return rej / n
    raise AssertionError("unreachable: x and y cannot both be parallel to axis")


def angle_between(u, v) -> float:
    """Angle in [0, pi] between two nonzero vectors."""
    a = unit(u)
    b = unit(v)
    return float(np.arctan2(np.linalg.norm(np.cross(a, b)), a @ b))


def _canonical_quat(q: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(q)
    if abs(n - 1.0) > 1e-14:
        q = q / n
    if q[0] < 0.0:
        q = -q
    elif q[0] == 0.0:
        # resolve the remaining sign ambiguity on the w = 0 great circle
        for c in q[1:]:
            if c != 0.0:
                if c < 0.0:
                    q = -q
                break
    return q


class Rotation:
    """3D rotation stored as a unit quaternion (w, x, y, z), w >= 0."""

    __slots__ = ("_q",)

    def __init__(self, w, x, y, z):
        q = np.array([w, x, y, z], dtype=float)
        n = np.linalg.norm(q)
        if not np.isfinite(n) or abs(n - 1.0) > UNIT_TOL:
            raise ValueError(f"quaternion norm {n:.9g} not unit within {UNIT_TOL}")
        self._q = _canonical_quat(q)
        self._q.setflags(write=False)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_quat(cls, q) -> "Rotation":
        q = np.asarray(q, dtype=float).reshape(4)
        return cls(q[0], q[1], q[2], q[3])

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "Rotation":
        """Rodrigues rotation about a unit axis; rejects non-unit axes."""
        a = require_unit(axis)
        h = 0.5 * float(angle)
        s = math.sin(h)
        return cls(math.cos(h), s * a[0], s * a[1], s * a[2])

    @classmethod
    def from_matrix(cls, m) -> "Rotation":
        """Shepperd's method; m must be a proper rotation matrix."""
        m = np.asarray(m, dtype=float).reshape(3, 3)
        tr = m[0, 0] + m[1, 1] + m[2, 2]
        if tr > 0:
            s = math.sqrt(tr + 1.0) * 2
            q = np.array([0.25 * s, (m[2, 1] - m[1, 2]) / s,
                          (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s])
        elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
            q = np.array([(m[2, 1] - m[1, 2]) / s, 0.25 * s,
                          (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s])
        elif m[1, 1] > m[2, 2]:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
            q = np.array([(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s,
                          0.25 * s, (m[1, 2] + m[2, 1]) / s])
        else:
            s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
            q = np.array([(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s,
                          (m[1, 2] + m[2, 1]) / s, 0.25 * s])
        return cls.from_quat(q / np.linalg.norm(q))

    @property
    def quat(self) -> np.ndarray:
        """Canonical (w, x, y, z) quaternion, read-only."""
        return self._q

    def as_matrix(self) -> np.ndarray:
        w, x, y, z = self._q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def apply(self, v) -> np.ndarray:
        """Rotate a 3-vector."""
        v = np.asarray(v, dtype=float).reshape(3)
        qv = self._q[1:]
        t = 2.0 * np.cross(qv, v)
        return v + self._q[0] * t + np.cross(qv, t)

    def __mul__(self, other: "Rotation") -> "Rotation":
        w1, x1, y1, z1 = self._q
        w2, x2, y2, z2 = other._q
        return Rotation(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def inverse(self) -> "Rotation":
        w, x, y, z = self._q
        return Rotation(w, -x, -y, -z)

    def angle_to(self, other: "Rotation") -> float:
        """Geodesic angle between two rotations (atan2 form, precise near 0)."""
        rel = (self.inverse() * other)._q
        return 2.0 * math.atan2(float(np.linalg.norm(rel[1:])), abs(float(rel[0])))

    def chordal_to(self, other: "Rotation") -> float:
        """Quaternion chordal distance, minimized over the double cover."""
        return float(min(np.linalg.norm(self._q - other._q),
                         np.linalg.norm(self._q + other._q)))

    def is_close(self, other: "Rotation", tol: float = 1e-9) -> bool:
        return self.chordal_to(other) <= tol

    def __repr__(self):
        w, x, y, z = self._q
        return f"Rotation(w={w:.6g}, x={x:.6g}, y={y:.6g}, z={z:.6g})"


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation then translation. Optional timestamp in seconds."""

    translation: np.ndarray
    rotation: Rotation = field(default_factory=Rotation.identity)
    stamp: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "translation", vec3(self.translation))
        self.translation.setflags(write=False)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.zeros(3))

    @classmethod
    def from_translation(cls, t) -> "Pose":
        return cls(vec3(t))

    def apply(self, point) -> np.ndarray:
        return self.rotation.apply(point) + self.translation

    def inverse(self) -> "Pose":
        rinv = self.rotation.inverse()
        return Pose(-rinv.apply(self.translation), rinv)

    def is_close(self, other: "Pose", tol: float = 1e-9) -> bool:
        return (np.linalg.norm(self.translation - other.translation) <= tol
                and self.rotation.is_close(other.rotation, tol))


def compose(a: Pose, b: Pose) -> Pose:
    """Rigid-transform composition a . b (apply b first in a's frame)."""
    return Pose(a.rotation.apply(b.translation) + a.translation,
                a.rotation * b.rotation,
                b.stamp if b.stamp is not None else a.stamp)


def relative_pose(fixed_frame: Pose, constrained_frame: Pose) -> Pose:
    """The constrained frame expressed in the fixed frame: inverse(fixed) . constrained."""
    rel = compose(fixed_frame.inverse(), constrained_frame)
    return Pose(rel.translation, rel.rotation, constrained_frame.stamp)


def rotation_from_axis_angle(axis, angle: float) -> Rotation:
    return Rotation.from_axis_angle(axis, angle)


# ---------------------------------------------------------------------------
# Primitive shapes (scene geometry)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    p: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))

    def transform(self, pose: Pose) -> "Point":
        return Point(pose.apply(self.p), self.name)


@dataclass(frozen=True)
class Line:
    p: np.ndarray
    a: np.ndarray  # unit direction
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))
        object.__setattr__(self, "a", require_unit(self.a))

    def transform(self, pose: Pose) -> "Line":
        return Line(pose.apply(self.p), pose.rotation.apply(self.a), self.name)


@dataclass(frozen=True)
class Plane:
    p: np.ndarray
    n: np.ndarray  # unit normal
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))
        object.__setattr__(self, "n", require_unit(self.n))

    def transform(self, pose: Pose) -> "Plane":
        return Plane(pose.apply(self.p), pose.rotation.apply(self.n), self.name)


@dataclass(frozen=True)
class Circle:
    p: np.ndarray
    n: np.ndarray  # unit normal of the circle's plane
    r: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))
        object.__setattr__(self, "n", require_unit(self.n))
        object.__setattr__(self, "r", float(self.r))
        if self.r <= 0:
            raise ValueError(f"circle radius must be positive, got {self.r}")

    def transform(self, pose: Pose) -> "Circle":
        return Circle(pose.apply(self.p), pose.rotation.apply(self.n), self.r, self.name)


@dataclass(frozen=True)
class Cylinder:
    p: np.ndarray  # a point on the axis
    a: np.ndarray  # unit axis direction
    r: float
    h: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))
        object.__setattr__(self, "a", require_unit(self.a))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "h", float(self.h))
        if self.r <= 0:
            raise ValueError(f"cylinder radius must be positive, got {self.r}")
        if self.h <= 0:
            raise ValueError(f"cylinder height must be positive, got {self.h}")

    def transform(self, pose: Pose) -> "Cylinder":
        return Cylinder(pose.apply(self.p), pose.rotation.apply(self.a),
                        self.r, self.h, self.name)


Shape = Point | Line | Plane | Circle | Cylinder
