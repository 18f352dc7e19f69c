"""Parametric nullspace manifolds: projections, residual distances, sampling.

A nullspace is a pair (translation manifold, rotation manifold).  Translation
manifolds are subsets of R^3 with a closed-form nearest-point projection;
rotation manifolds constrain one body axis of the constrained frame (picked by
a selector, default +z) relative to a fixed direction.

Distances:

- ``dist_t`` is the Euclidean norm between a point and its projection.
- ``dist_r`` is the Euclidean norm between the quaternions of a rotation and
  its projection, minimized over the quaternion double cover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (Pose, Rotation, angle_between, perpendicular_to,
                       require_unit, unit, vec3)

TWO_PI = 2.0 * math.pi

_SELECTOR_AXES = {
    "+x": np.array([1.0, 0.0, 0.0]), "-x": np.array([-1.0, 0.0, 0.0]),
    "+y": np.array([0.0, 1.0, 0.0]), "-y": np.array([0.0, -1.0, 0.0]),
    "+z": np.array([0.0, 0.0, 1.0]), "-z": np.array([0.0, 0.0, -1.0]),
}


def selector_axis(selector: str) -> np.ndarray:
    try:
        return _SELECTOR_AXES[selector]
    except KeyError:
        raise ValueError(f"unknown axis selector {selector!r}") from None


def constrained_axis(rotation: Rotation, selector: str = "+z") -> np.ndarray:
    """The selected body axis of the constrained frame, rotated into the fixed frame."""
    return rotation.apply(selector_axis(selector))


@dataclass(frozen=True)
class ExtentBounds:
    """Closed intervals restricting named free dimensions of a manifold."""

    intervals: tuple[tuple[str, float, float], ...] = ()

    def __post_init__(self):
        for name, lo, hi in self.intervals:
            if lo > hi:
                raise ValueError(f"bound {name}: lo {lo} > hi {hi}")

    @classmethod
    def of(cls, **named) -> "ExtentBounds":
        return cls(tuple((k, float(lo), float(hi)) for k, (lo, hi) in named.items()))

    def get(self, name: str):
        for n, lo, hi in self.intervals:
            if n == name:
                return (lo, hi)
        return None

    def names(self):
        return tuple(n for n, _, _ in self.intervals)

    def with_interval(self, name: str, lo: float, hi: float) -> "ExtentBounds":
        items = [iv for iv in self.intervals if iv[0] != name]
        items.append((name, float(lo), float(hi)))
        return ExtentBounds(tuple(items))

    def __bool__(self):
        return bool(self.intervals)


# ---------------------------------------------------------------------------
# Translation manifolds (one dataclass per table row)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Full3Space:
    bounds: ExtentBounds = field(default_factory=ExtentBounds)


@dataclass(frozen=True)
class PointManifold:
    p: np.ndarray
    bounds: ExtentBounds = field(default_factory=ExtentBounds)

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))


@dataclass(frozen=True)
class LineManifold:
    p: np.ndarray
    a: np.ndarray
    bounds: ExtentBounds = field(default_factory=ExtentBounds)

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))
        object.__setattr__(self, "a", require_unit(self.a))


@dataclass(frozen=True)
class CircleManifold:
    p: np.ndarray
    n: np.ndarray
    r: float
    bounds: ExtentBounds = field(default_factory=ExtentBounds)

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))
        object.__setattr__(self, "n", require_unit(self.n))
        object.__setattr__(self, "r", float(self.r))
        if self.r <= 0:
            raise ValueError(f"circle manifold radius must be positive, got {self.r}")


@dataclass(frozen=True)
class PlaneManifold:
    p: np.ndarray
    n: np.ndarray
    bounds: ExtentBounds = field(default_factory=ExtentBounds)

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))
        object.__setattr__(self, "n", require_unit(self.n))


@dataclass(frozen=True)
class CylinderManifold:
    p: np.ndarray
    a: np.ndarray
    r: float
    bounds: ExtentBounds = field(default_factory=ExtentBounds)

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))
        object.__setattr__(self, "a", require_unit(self.a))
        object.__setattr__(self, "r", float(self.r))
        if self.r <= 0:
            raise ValueError(f"cylinder manifold radius must be positive, got {self.r}")


TranslationManifold = (Full3Space | PointManifold | LineManifold |
                       CircleManifold | PlaneManifold | CylinderManifold)

#: free dimensions per manifold type: (name, compact) pairs.  Compact dims
#: (full angles) have a natural sampling range and never require bounds.
_FREE_DIMS = {
    Full3Space: (("x", False), ("y", False), ("z", False)),
    PointManifold: (),
    LineManifold: (("t", False),),
    CircleManifold: (("angle", True),),
    PlaneManifold: (("u", False), ("v", False)),
    CylinderManifold: (("axial", False), ("angle", True)),
}


def free_dims(m: TranslationManifold):
    return _FREE_DIMS[type(m)]


def translation_dim(m: TranslationManifold) -> int:
    return len(_FREE_DIMS[type(m)])


def _plane_basis(n: np.ndarray):
    e1 = perpendicular_to(n)
    e2 = np.cross(n, e1)
    return e1, e2


# ---------------------------------------------------------------------------
# Rotation manifolds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FullSO3:
    selector: str = "+z"


@dataclass(frozen=True)
class OneParallel:
    """Constrained body axis parallel to the fixed direction v_f."""

    v_f: np.ndarray
    selector: str = "+z"

    def __post_init__(self):
        object.__setattr__(self, "v_f", require_unit(self.v_f))
        selector_axis(self.selector)


@dataclass(frozen=True)
class OneAngle:
    """Constrained body axis at angle theta (or within [theta_min, theta_max])
    from the fixed direction v_f."""

    v_f: np.ndarray
    theta: float
    interval: tuple[float, float] | None = None
    selector: str = "+z"

    def __post_init__(self):
        object.__setattr__(self, "v_f", require_unit(self.v_f))
        object.__setattr__(self, "theta", float(self.theta))
        selector_axis(self.selector)
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if self.interval is not None:
            lo, hi = float(self.interval[0]), float(self.interval[1])
            if lo > hi:
                raise ValueError(f"angle interval lo {lo} > hi {hi}")
            if lo < -1e-12 or hi > math.pi + 1e-12:
                raise ValueError(f"angle interval [{lo}, {hi}] outside [0, pi]")
            object.__setattr__(self, "interval", (max(lo, 0.0), min(hi, math.pi)))


RotationManifold = FullSO3 | OneParallel | OneAngle


def rotation_dim(m: RotationManifold) -> int:
    if isinstance(m, FullSO3):
        return 3
    if isinstance(m, OneParallel):
        return 1
    return 2


@dataclass(frozen=True)
class NullspaceModel:
    translation: TranslationManifold
    rotation: RotationManifold
    rms_fit_residual: float = 0.0

    def __post_init__(self):
        if self.rms_fit_residual < 0:
            raise ValueError("rms residual must be non-negative")

    def dim(self) -> int:
        return translation_dim(self.translation) + rotation_dim(self.rotation)


# ---------------------------------------------------------------------------
# Translation projection / coordinates / distance
# ---------------------------------------------------------------------------

def _radial_direction(offset: np.ndarray, axis: np.ndarray) -> np.ndarray:
    """Unit direction of `offset`, or the deterministic perpendicular fallback
    when `offset` vanishes (point on the axis)."""
    n = np.linalg.norm(offset)
    if n < 1e-12:
        return perpendicular_to(axis)
    return offset / n


def project_translation(m: TranslationManifold, u, bounded: bool = False) -> np.ndarray:
    """Nearest manifold point to u.

    With ``bounded=True`` the manifold coordinates of the projection are also
    clamped into the manifold's ExtentBounds.
    """
    u = vec3(u)
    if isinstance(m, Full3Space):
        proj = u.copy()
    elif isinstance(m, PointManifold):
        proj = m.p.copy()
    elif isinstance(m, LineManifold):
        proj = m.p + ((u - m.p) @ m.a) * m.a
    elif isinstance(m, PlaneManifold):
        proj = u + ((m.p - u) @ m.n) * m.n
    elif isinstance(m, CircleManifold):
        inplane = u + ((m.p - u) @ m.n) * m.n
        proj = m.p + m.r * _radial_direction(inplane - m.p, m.n)
    elif isinstance(m, CylinderManifold):
        # axial foot point on the axis line, then offset radially by r;
        # nearest-point semantics (verified against a numeric oracle in tests)
        foot = m.p + ((u - m.p) @ m.a) * m.a
        proj = foot + m.r * _radial_direction(u - foot, m.a)
    else:
        raise TypeError(f"not a translation manifold: {m!r}")
    if bounded and m.bounds:
        proj = translation_point(m, _clamp_coords(m, translation_coords(m, proj)))
    return proj


def _clamp_coords(m: TranslationManifold, coords: dict) -> dict:
    out = dict(coords)
    for name, lo_hi in ((n, m.bounds.get(n)) for n, _ in free_dims(m)):
        if lo_hi is None:
            continue
        lo, hi = lo_hi
        if name == "angle":
            mid = 0.5 * (lo + hi)
            delta = (out[name] - mid + math.pi) % TWO_PI - math.pi
            out[name] = mid + min(max(delta, lo - mid), hi - mid)
        else:
            out[name] = min(max(out[name], lo), hi)
    return out


def translation_coords(m: TranslationManifold, u) -> dict:
    """Manifold coordinates of (the projection of) a point."""
    u = vec3(u)
    if isinstance(m, Full3Space):
        return {"x": float(u[0]), "y": float(u[1]), "z": float(u[2])}
    if isinstance(m, PointManifold):
        return {}
    if isinstance(m, LineManifold):
        return {"t": float((u - m.p) @ m.a)}
    if isinstance(m, PlaneManifold):
        e1, e2 = _plane_basis(m.n)
        d = u - m.p
        return {"u": float(d @ e1), "v": float(d @ e2)}
    if isinstance(m, CircleManifold):
        e1, e2 = _plane_basis(m.n)
        d = u - m.p
        x, y = d @ e1, d @ e2
        if abs(x) < 1e-12 and abs(y) < 1e-12:
            return {"angle": 0.0}
        return {"angle": float(math.atan2(y, x))}
    if isinstance(m, CylinderManifold):
        e1, e2 = _plane_basis(m.a)
        d = u - m.p
        axial = float(d @ m.a)
        x, y = d @ e1, d @ e2
        angle = 0.0 if (abs(x) < 1e-12 and abs(y) < 1e-12) else float(math.atan2(y, x))
        return {"axial": axial, "angle": angle}
    raise TypeError(f"not a translation manifold: {m!r}")


def translation_point(m: TranslationManifold, coords: dict) -> np.ndarray:
    """Inverse of translation_coords: rebuild the manifold point."""
    if isinstance(m, Full3Space):
        return np.array([coords["x"], coords["y"], coords["z"]], dtype=float)
    if isinstance(m, PointManifold):
        return m.p.copy()
    if isinstance(m, LineManifold):
        return m.p + coords["t"] * m.a
    if isinstance(m, PlaneManifold):
        e1, e2 = _plane_basis(m.n)
        return m.p + coords["u"] * e1 + coords["v"] * e2
    if isinstance(m, CircleManifold):
        e1, e2 = _plane_basis(m.n)
        ang = coords["angle"]
        return m.p + m.r * (math.cos(ang) * e1 + math.sin(ang) * e2)
    if isinstance(m, CylinderManifold):
        e1, e2 = _plane_basis(m.a)
        ang = coords["angle"]
        radial = math.cos(ang) * e1 + math.sin(ang) * e2
        return m.p + coords["axial"] * m.a + m.r * radial
    raise TypeError(f"not a translation manifold: {m!r}")


def dist_t(m: TranslationManifold, u, bounded: bool = False) -> float:
    return float(np.linalg.norm(project_translation(m, u, bounded=bounded) - vec3(u)))


def dist_t_many(m: TranslationManifold, points: np.ndarray) -> np.ndarray:
    """Vectorized unbounded dist_t over an (n, 3) array (fitting hot path)."""
    U = np.asarray(points, dtype=float).reshape(-1, 3)
    if isinstance(m, Full3Space):
        return np.zeros(len(U))
    if isinstance(m, PointManifold):
        return np.linalg.norm(U - m.p, axis=1)
    if isinstance(m, LineManifold):
        d = U - m.p
        t = d @ m.a
        return np.linalg.norm(d - t[:, None] * m.a, axis=1)
    if isinstance(m, PlaneManifold):
        return np.abs((U - m.p) @ m.n)
    if isinstance(m, CircleManifold):
        d = U - m.p
        h = d @ m.n
        radial = np.linalg.norm(d - h[:, None] * m.n, axis=1)
        return np.sqrt(np.maximum((radial - m.r) ** 2 + h ** 2, 0.0))
    if isinstance(m, CylinderManifold):
        d = U - m.p
        t = d @ m.a
        radial = np.linalg.norm(d - t[:, None] * m.a, axis=1)
        return np.abs(radial - m.r)
    raise TypeError(f"not a translation manifold: {m!r}")


# ---------------------------------------------------------------------------
# Rotation projection / distance
# ---------------------------------------------------------------------------

def _align_rotation(v_from: np.ndarray, v_to: np.ndarray) -> Rotation:
    """Minimal rotation taking v_from onto v_to (fallback axis when antiparallel)."""
    ang = angle_between(v_from, v_to)
    if ang < 1e-15:
        return Rotation.identity()
    w = np.cross(v_from, v_to)
    if np.linalg.norm(w) < 1e-12:
        w = perpendicular_to(v_to)
    else:
        w = unit(w)
    return Rotation.from_axis_angle(w, ang)


def _one_angle_target(m: OneAngle, alpha: float) -> float:
    if m.interval is not None:
        lo, hi = m.interval
        return min(max(alpha, lo), hi)
    return m.theta


def project_rotation(m: RotationManifold, r_i: Rotation) -> Rotation:
    """Minimal correction of r_i onto the rotation manifold.

    The correction rotates the constrained axis v_c about normalize(v_c x v_f)
    by (angle(v_c, v_f) - target), so the post-condition -- parallelism for
    OneParallel, the target angle for OneAngle -- holds by construction.
    """
    if isinstance(m, FullSO3):
        return r_i
    v_c = constrained_axis(r_i, m.selector)
    alpha = angle_between(v_c, m.v_f)
    target = 0.0 if isinstance(m, OneParallel) else _one_angle_target(m, alpha)
    delta = alpha - target
    if abs(delta) < 1e-15:
        return r_i
    w = np.cross(v_c, m.v_f)
    if np.linalg.norm(w) < 1e-12:
        w = perpendicular_to(m.v_f)
    else:
        w = unit(w)
    return Rotation.from_axis_angle(w, delta) * r_i


def quat_distance(a: Rotation, b: Rotation) -> float:
    """Chordal quaternion distance, minimized over the double cover."""
    return a.chordal_to(b)


def dist_r(m: RotationManifold, r_i: Rotation) -> float:
    return quat_distance(project_rotation(m, r_i), r_i)


def rotation_residual_vec(m: RotationManifold, r_i: Rotation) -> np.ndarray:
    """Sign-resolved quaternion difference (smooth near zero; solver use)."""
    qp, qi = project_rotation(m, r_i).quat, r_i.quat
    d1, d2 = qp - qi, qp + qi
    return d1 if np.linalg.norm(d1) <= np.linalg.norm(d2) else d2


def rotation_coords(m: RotationManifold, r_i: Rotation) -> dict:
    """Free angular coordinate(s) of a rotation relative to the manifold."""
    if isinstance(m, OneAngle):
        return {"theta": angle_between(constrained_axis(r_i, m.selector), m.v_f)}
    return {}


def angles_to_many(v_f: np.ndarray, axes: np.ndarray) -> np.ndarray:
    """Vectorized angle(v_c_i, v_f) for (n, 3) unit rows (fitting hot path)."""
    axes = np.asarray(axes, dtype=float).reshape(-1, 3)
    dots = np.clip(axes @ v_f, -1.0, 1.0)
    cross = np.linalg.norm(np.cross(axes, v_f[None, :]), axis=1)
    return np.arctan2(cross, dots)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    """Fallback sampling ranges for free dimensions without ExtentBounds."""

    ranges: tuple[tuple[str, float, float], ...] = ()

    @classmethod
    def of(cls, **named) -> "SampleSpec":
        return cls(tuple((k, float(lo), float(hi)) for k, (lo, hi) in named.items()))

    def get(self, name: str):
        for n, lo, hi in self.ranges:
            if n == name:
                return (lo, hi)
        return None


def _sample_interval(name: str, compact: bool, bounds: ExtentBounds,
                     spec: SampleSpec, rng: np.random.Generator) -> float:
    interval = bounds.get(name) or spec.get(name)
    if interval is None:
        if not compact:
            raise ValueError(f"unbounded sample domain: no bounds or range for {name!r}")
        interval = (0.0, TWO_PI)
    return float(rng.uniform(interval[0], interval[1]))


def _haar_rotation(rng: np.random.Generator) -> Rotation:
    u1, u2, u3 = rng.uniform(size=3)
    a, b = math.sqrt(1.0 - u1), math.sqrt(u1)
    return Rotation(a * math.sin(TWO_PI * u2), a * math.cos(TWO_PI * u2),
                    b * math.sin(TWO_PI * u3), b * math.cos(TWO_PI * u3))


def _sample_translation(m: TranslationManifold, spec: SampleSpec,
                        rng: np.random.Generator) -> np.ndarray:
    coords = {name: _sample_interval(name, compact, m.bounds, spec, rng)
              for name, compact in free_dims(m)}
    return translation_point(m, coords)


def _sample_rotation(m: RotationManifold, spec: SampleSpec,
                     rng: np.random.Generator) -> Rotation:
    if isinstance(m, FullSO3):
        return _haar_rotation(rng)
    e_sel = selector_axis(m.selector)
    if isinstance(m, OneParallel):
        spin = rng.uniform(0.0, TWO_PI)
        return Rotation.from_axis_angle(m.v_f, spin) * _align_rotation(e_sel, m.v_f)
    # OneAngle: tilt v_f by theta at a random azimuth, then spin about the result
    if m.interval is not None:
        theta = float(rng.uniform(m.interval[0], m.interval[1]))
    else:
        theta = m.theta
    azimuth = rng.uniform(0.0, TWO_PI)
    tilt = Rotation.from_axis_angle(perpendicular_to(m.v_f), theta)
    v_c = Rotation.from_axis_angle(m.v_f, azimuth).apply(tilt.apply(m.v_f))
    spin = rng.uniform(0.0, TWO_PI)
    return Rotation.from_axis_angle(v_c, spin) * _align_rotation(e_sel, v_c)


def sample_pose(model: NullspaceModel, spec: SampleSpec = SampleSpec(),
                seed: int | np.random.Generator = 0) -> Pose:
    """Draw one pose uniformly from the nullspace; deterministic per seed.

    Raises ValueError when a non-compact free dimension has neither
    ExtentBounds nor a SampleSpec range.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    t = _sample_translation(model.translation, spec, rng)
    r = _sample_rotation(model.rotation, spec, rng)
    return Pose(t, r)


def nullspace_distances(model: NullspaceModel, pose: Pose,
                        bounded: bool = True) -> tuple[float, float]:
    """(dist_t, dist_r) of a relative pose against the nullspace."""
    return (dist_t(model.translation, pose.translation, bounded=bounded),
            dist_r(model.rotation, pose.rotation))


def with_translation_bounds(model: NullspaceModel, bounds: ExtentBounds) -> NullspaceModel:
    return replace(model, translation=replace(model.translation, bounds=bounds))
