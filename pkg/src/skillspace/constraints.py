"""Semantic geometric constraints and their nullspace mapping.

A GeometricConstraint relates a fixed shape to a constrained shape (distance,
angle, coincidence, concentricity, parallelism).  Each supported combination
induces a nullspace of relative poses of the constrained object's frame with
respect to the fixed object's frame: a translation manifold for the frame
origin and a rotation manifold for a chosen body axis.

Conventions that make the translation/rotation factorization exact:

- manifolds are expressed in the fixed object's frame; the fixed shape's
  parameters are taken in that frame
- the constrained shape is anchored at the constrained object's origin
  (points at the origin, lines and planes through it); the one exception is a
  constrained cylinder, whose axis may be offset radially so the origin rides
  on its surface (a gripper wrapped around an object)
- angle values are measured between stored direction vectors (line direction
  or plane normal), in [0, pi]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .geometry import (Circle, Cylinder, Line, Plane, Point, Pose, Shape,
                       angle_between)
from .manifolds import (CircleManifold, CylinderManifold, Full3Space, FullSO3,
                        LineManifold, NullspaceModel, OneAngle, OneParallel,
                        PlaneManifold, PointManifold, TranslationManifold,
                        selector_axis, translation_dim)

COMPAT_TOL = 1e-6  # constrained-shape anchoring tolerance


class Relation(str, Enum):
    DISTANCE = "distance"
    ANGLE = "angle"
    COINCIDENT = "coincident"
    CONCENTRIC = "concentric"
    PARALLEL = "parallel"


VALUELESS = (Relation.COINCIDENT, Relation.CONCENTRIC, Relation.PARALLEL)


@dataclass(frozen=True)
class ShapeRef:
    obj: str
    shape: str

    @classmethod
    def parse(cls, text: str) -> "ShapeRef":
        obj, _, shape = text.partition("/")
        if not obj or not shape:
            raise ValueError(f"shape reference must look like object/shape, got {text!r}")
        return cls(obj, shape)

    def __str__(self):
        return f"{self.obj}/{self.shape}"


@dataclass(frozen=True)
class GeometricConstraint:
    fixed: ShapeRef
    constrained: ShapeRef
    relation: Relation
    value: float | None = None
    interval: tuple[float, float] | None = None

    def __post_init__(self):
        if self.relation in VALUELESS:
            if self.value is not None or self.interval is not None:
                raise ValueError(f"{self.relation.value} carries no value")
        else:
            if self.value is None and self.interval is None:
                raise ValueError(f"{self.relation.value} needs a value or interval")
            if self.value is not None and self.interval is not None:
                raise ValueError("give either a value or an interval, not both")
        if self.interval is not None:
            lo, hi = self.interval
            if lo > hi:
                raise ValueError(f"interval lo {lo} > hi {hi}")
            object.__setattr__(self, "interval", (float(lo), float(hi)))
        if self.value is not None:
            object.__setattr__(self, "value", float(self.value))

    def describe(self) -> str:
        tail = ""
        if self.value is not None:
            tail = f" = {self.value:.6g}"
        elif self.interval is not None:
            tail = f" in [{self.interval[0]:.6g}, {self.interval[1]:.6g}]"
        return f"{self.relation.value}({self.fixed}, {self.constrained}){tail}"


@dataclass(frozen=True)
class SceneObject:
    name: str
    pose: Pose
    shapes: tuple[Shape, ...]

    def __post_init__(self):
        object.__setattr__(self, "shapes", tuple(self.shapes))
        names = [s.name for s in self.shapes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate shape names on object {self.name!r}")

    def shape(self, name: str) -> Shape:
        for s in self.shapes:
            if s.name == name:
                return s
        raise KeyError(f"object {self.name!r} has no shape {name!r}")


@dataclass(frozen=True)
class Scene:
    objects: tuple[SceneObject, ...]

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        names = [o.name for o in self.objects]
        if len(set(names)) != len(names):
            raise ValueError("duplicate object names in scene")

    def object(self, name: str) -> SceneObject:
        for o in self.objects:
            if o.name == name:
                return o
        raise KeyError(f"scene has no object {name!r}")

    def resolve(self, ref: ShapeRef) -> Shape:
        """Shape in its owner object's frame."""
        return self.object(ref.obj).shape(ref.shape)

    def world_shape(self, ref: ShapeRef) -> Shape:
        o = self.object(ref.obj)
        return o.shape(ref.shape).transform(o.pose)


# ---------------------------------------------------------------------------
# Shape helpers
# ---------------------------------------------------------------------------

def shape_direction(s: Shape):
    if isinstance(s, (Line, Cylinder)):
        return s.a
    if isinstance(s, (Plane, Circle)):
        return s.n
    return None


def _selector_for(direction: np.ndarray) -> str:
    """Body-axis selector matching a constrained shape's direction."""
    for sel in ("+x", "-x", "+y", "-y", "+z", "-z"):
        if angle_between(direction, selector_axis(sel)) <= 1e-6:
            return sel
    raise ValueError("constrained direction must be a principal body axis "
                     f"(got {direction})")


def _require_origin(p: np.ndarray, what: str):
    if np.linalg.norm(p) > COMPAT_TOL:
        raise ValueError(f"unsupported constrained shape: {what} must sit at "
                         "the constrained object's origin")


def _axis_offset(s: Line | Cylinder) -> float:
    """Radial distance of the object origin from the shape's axis."""
    perp = s.p - (s.p @ s.a) * s.a
    return float(np.linalg.norm(perp))


def line_line_distance(p1, a1, p2, a2) -> float:
    """Distance between two (infinite) lines."""
    p1, a1 = np.asarray(p1, dtype=float), np.asarray(a1, dtype=float)
    p2, a2 = np.asarray(p2, dtype=float), np.asarray(a2, dtype=float)
    c = np.cross(a1, a2)
    n = np.linalg.norm(c)
    d = p2 - p1
    if n < 1e-9:  # parallel
        return float(np.linalg.norm(d - (d @ a1) * a1))
    return float(abs(d @ (c / n)))


# ---------------------------------------------------------------------------
# constraint -> nullspace (Table rows plus the zero-distance specializations)
# ---------------------------------------------------------------------------

def _no_row(c: GeometricConstraint, why: str = ""):
    detail = f": {why}" if why else ""
    return ValueError(f"no Table I row for {c.describe()}{detail}")


def constraint_nullspace(c: GeometricConstraint, scene: Scene) -> NullspaceModel:
    """Transformation manifold of relative poses satisfying one constraint.

    Expressed in the fixed object's frame.  Interval-valued ANGLE constraints
    yield an angle-interval rotation manifold; interval-valued DISTANCE
    constraints describe slabs that only make sense as bounds on another
    constraint's manifold, so they are rejected here (see derive_nullspace).
    """
    f = scene.resolve(c.fixed)
    g = scene.resolve(c.constrained)
    rel = c.relation

    if rel in (Relation.DISTANCE, Relation.ANGLE) and c.interval is not None \
            and rel is Relation.DISTANCE:
        raise _no_row(c, "interval distances only bound another manifold")

    # fixed cylinders participate through their axis line
    f_line = (f.p, f.a) if isinstance(f, (Line, Cylinder)) else None

    if rel is Relation.PARALLEL:
        d_f, d_c = shape_direction(f), shape_direction(g)
        if d_f is None or d_c is None:
            raise _no_row(c, "parallelism needs directed shapes")
        return NullspaceModel(Full3Space(), OneParallel(d_f, _selector_for(d_c)))

    if rel is Relation.ANGLE:
        d_f, d_c = shape_direction(f), shape_direction(g)
        if d_f is None or d_c is None:
            raise _no_row(c, "angles need directed shapes")
        sel = _selector_for(d_c)
        if c.interval is not None:
            lo, hi = c.interval
            rot = OneAngle(d_f, 0.5 * (lo + hi), interval=(lo, hi), selector=sel)
        elif abs(c.value) <= 1e-12:
            rot = OneParallel(d_f, sel)
        else:
            rot = OneAngle(d_f, c.value, selector=sel)
        return NullspaceModel(Full3Space(), rot)

    if rel is Relation.CONCENTRIC:
        if f_line is None or not isinstance(g, (Line, Cylinder)):
            raise _no_row(c, "concentricity needs two axes")
        sel = _selector_for(g.a)
        rho = _axis_offset(g)
        rot = OneParallel(f.a, sel)
        if rho <= COMPAT_TOL:
            return NullspaceModel(LineManifold(f.p, f.a), rot)
        return NullspaceModel(CylinderManifold(f.p, f.a, rho), rot)

    value = 0.0 if rel is Relation.COINCIDENT else c.value

    if isinstance(f, Point):
        if not isinstance(g, Point):
            raise _no_row(c)
        _require_origin(g.p, "point")
        if abs(value) > COMPAT_TOL:
            raise _no_row(c, "point-point supports only coincidence")
        return NullspaceModel(PointManifold(f.p), FullSO3())

    if isinstance(f, Circle):
        if not isinstance(g, Point):
            raise _no_row(c)
        _require_origin(g.p, "point")
        if abs(value) > COMPAT_TOL:
            raise _no_row(c, "circle-point supports only coincidence")
        return NullspaceModel(CircleManifold(f.p, f.n, f.r), FullSO3())

    if f_line is not None:
        p_f, a_f = f_line
        if isinstance(g, Point):
            _require_origin(g.p, "point")
            if abs(value) <= COMPAT_TOL:
                return NullspaceModel(LineManifold(p_f, a_f), FullSO3())
            return NullspaceModel(CylinderManifold(p_f, a_f, value), FullSO3())
        if isinstance(g, (Line, Cylinder)):
            # the constrained axis must thread the origin (slide along itself
            # is fine); radial offsets belong to the CONCENTRIC relation
            _require_origin(g.p - (g.p @ g.a) * g.a, "line (radially)")
            sel = _selector_for(g.a)
            rot = OneParallel(a_f, sel)
            if abs(value) <= COMPAT_TOL:
                return NullspaceModel(LineManifold(p_f, a_f), rot)
            return NullspaceModel(CylinderManifold(p_f, a_f, value), rot)
        raise _no_row(c)

    if isinstance(f, Plane):
        if isinstance(g, Point):
            _require_origin(g.p, "point")
            return NullspaceModel(PlaneManifold(f.p + value * f.n, f.n), FullSO3())
        if isinstance(g, Line):
            _require_origin(g.p, "line")
            sel = _selector_for(g.a)
            rot = OneAngle(f.n, math.pi / 2, selector=sel)
            return NullspaceModel(PlaneManifold(f.p + value * f.n, f.n), rot)
        if isinstance(g, Plane):
            offset_c = float(g.p @ g.n)
            sel = _selector_for(g.n)
            rot = OneParallel(f.n, sel)
            return NullspaceModel(
                PlaneManifold(f.p + (value - offset_c) * f.n, f.n), rot)
        raise _no_row(c)

    raise _no_row(c)


_ROT_RESTRICTIVENESS = {OneParallel: 0, OneAngle: 1, FullSO3: 2}


def derive_nullspace(constraints, scene: Scene,
                     params: dict | None = None) -> NullspaceModel:
    """Combined nullspace of a constraint set (intersection).

    The most restrictive translation and rotation manifolds among the
    per-constraint nullspaces are kept; interval-valued DISTANCE constraints
    become extent bounds along the matching manifold direction.  `params` may
    carry skill parameters that override scene-derived geometry (a grasp
    radius replacing the nominal grip-cylinder offset).
    """
    params = params or {}
    translation: TranslationManifold = Full3Space()
    rotation = FullSO3()
    bound_constraints = []
    for c in constraints:
        if c.relation is Relation.DISTANCE and c.interval is not None:
            bound_constraints.append(c)
            continue
        n = constraint_nullspace(c, scene)
        tm = n.translation
        if c.relation is Relation.CONCENTRIC and "radius" in params \
                and isinstance(tm, LineManifold) and params["radius"] > COMPAT_TOL:
            tm = CylinderManifold(tm.p, tm.a, float(params["radius"]))
        if translation_dim(tm) < translation_dim(translation):
            translation = tm
        if _ROT_RESTRICTIVENESS[type(n.rotation)] < _ROT_RESTRICTIVENESS[type(rotation)]:
            rotation = n.rotation
    # skill parameters override nominal scene geometry (e.g. an edited grasp
    # or stir radius)
    if "radius" in params and isinstance(translation,
                                         (CircleManifold, CylinderManifold)):
        translation = replace(translation, r=float(params["radius"]))

    bounds = translation.bounds
    for c in bound_constraints:
        f = scene.resolve(c.fixed)
        g = scene.resolve(c.constrained)
        if not isinstance(f, Plane):
            raise _no_row(c, "interval distances need a fixed plane")
        offset_c = float(g.p @ g.n) if isinstance(g, Plane) else 0.0
        axis = getattr(translation, "a", None)
        if axis is None or angle_between(axis, f.n) > 1e-6 and \
                angle_between(-axis, f.n) > 1e-6:
            raise _no_row(c, "interval distance plane must face the manifold axis")
        tau = 1.0 if axis @ f.n > 0 else -1.0
        off = float((translation.p - f.p) @ axis)
        lo = tau * (c.interval[0] - offset_c) - off
        hi = tau * (c.interval[1] - offset_c) - off
        lo, hi = min(lo, hi), max(lo, hi)
        dim = "axial" if isinstance(translation, CylinderManifold) else "t"
        bounds = bounds.with_interval(dim, lo, hi)
    if bounds:
        translation = replace(translation, bounds=bounds)
    return NullspaceModel(translation, rotation)


# ---------------------------------------------------------------------------
# nullspace -> constraints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchTolerance:
    position: float = 0.01        # meters
    angle: float = math.radians(5.0)


@dataclass(frozen=True)
class ConstraintCandidate:
    constraint: GeometricConstraint
    score: float
    kind: str  # "translation" | "rotation" | "bound"


def _direction_mismatch(d_f, v, tol) -> float | None:
    """Unsigned angular mismatch between a fixed direction and a manifold
    direction, or None when outside tolerance."""
    ang = min(angle_between(d_f, v), angle_between(-np.asarray(d_f, float), v))
    return ang if ang <= tol.angle else None


def _constrained_points(obj: SceneObject):
    for s in obj.shapes:
        if isinstance(s, Point) and np.linalg.norm(s.p) <= COMPAT_TOL:
            yield s


def _constrained_lines(obj: SceneObject):
    for s in obj.shapes:
        if isinstance(s, Line) and np.linalg.norm(s.p) <= COMPAT_TOL:
            yield s


def _constrained_planes(obj: SceneObject):
    for s in obj.shapes:
        if isinstance(s, Plane):
            yield s


def _constrained_cylinders(obj: SceneObject):
    for s in obj.shapes:
        if isinstance(s, Cylinder):
            yield s


def _is_body_axis(direction) -> bool:
    try:
        _selector_for(direction)
        return True
    except ValueError:
        return False


def _translation_candidates(model, fobj, cobj, tol):
    tm = model.translation
    rm = model.rotation
    out = []

    def ref(shape, obj):
        return ShapeRef(obj.name, shape.name)

    for f in fobj.shapes:
        if isinstance(tm, PointManifold) and isinstance(f, Point):
            err = float(np.linalg.norm(f.p - tm.p))
            if err <= tol.position:
                for g in _constrained_points(cobj):
                    out.append(ConstraintCandidate(
                        GeometricConstraint(ref(f, fobj), ref(g, cobj),
                                            Relation.COINCIDENT),
                        err / tol.position, "translation"))
        elif isinstance(tm, CircleManifold) and isinstance(f, Circle):
            ang = _direction_mismatch(f.n, tm.n, tol)
            err = float(np.linalg.norm(f.p - tm.p))
            if ang is not None and err <= tol.position \
                    and abs(f.r - tm.r) <= tol.position:
                for g in _constrained_points(cobj):
                    out.append(ConstraintCandidate(
                        GeometricConstraint(ref(f, fobj), ref(g, cobj),
                                            Relation.COINCIDENT),
                        err / tol.position + ang / tol.angle, "translation"))
        elif isinstance(tm, LineManifold) and isinstance(f, (Line, Cylinder)):
            ang = _direction_mismatch(f.a, tm.a, tol)
            if ang is None:
                continue
            err = line_line_distance(f.p, f.a, tm.p, tm.a)
            if err > tol.position:
                continue
            score = err / tol.position + ang / tol.angle
            for g in _constrained_points(cobj):
                out.append(ConstraintCandidate(
                    GeometricConstraint(ref(f, fobj), ref(g, cobj),
                                        Relation.COINCIDENT),
                    score, "translation"))
            if isinstance(rm, OneParallel):
                for g in _constrained_lines(cobj):
                    out.append(ConstraintCandidate(
                        GeometricConstraint(ref(f, fobj), ref(g, cobj),
                                            Relation.CONCENTRIC),
                        score + 0.001, "translation"))
        elif isinstance(tm, PlaneManifold) and isinstance(f, Plane):
            ang = _direction_mismatch(f.n, tm.n, tol)
            if ang is None:
                continue
            sigma = 1.0 if tm.n @ f.n > 0 else -1.0
            plane_offset = sigma * float((tm.p - f.p) @ tm.n)
            if isinstance(rm, OneParallel):
                for g in _constrained_planes(cobj):
                    if not _is_body_axis(g.n):
                        continue
                    v = plane_offset + float(g.p @ g.n)
                    rel = (Relation.COINCIDENT if abs(v) <= tol.position
                           else Relation.DISTANCE)
                    val = None if rel is Relation.COINCIDENT else v
                    out.append(ConstraintCandidate(
                        GeometricConstraint(ref(f, fobj), ref(g, cobj), rel,
                                            value=val),
                        ang / tol.angle + min(abs(v), 1.0) * 1e-3, "translation"))
            if isinstance(rm, OneAngle) and rm.interval is None \
                    and abs(rm.theta - math.pi / 2) <= tol.angle \
                    and _direction_mismatch(f.n, rm.v_f, tol) is not None:
                # a constrained line held parallel to the fixed plane
                for g in _constrained_lines(cobj):
                    rel = (Relation.COINCIDENT if abs(plane_offset) <= tol.position
                           else Relation.DISTANCE)
                    val = None if rel is Relation.COINCIDENT else plane_offset
                    out.append(ConstraintCandidate(
                        GeometricConstraint(ref(f, fobj), ref(g, cobj), rel,
                                            value=val),
                        ang / tol.angle + min(abs(plane_offset), 1.0) * 1e-3
                        + 0.005, "translation"))
            for g in _constrained_points(cobj):
                rel = (Relation.COINCIDENT if abs(plane_offset) <= tol.position
                       else Relation.DISTANCE)
                val = None if rel is Relation.COINCIDENT else plane_offset
                out.append(ConstraintCandidate(
                    GeometricConstraint(ref(f, fobj), ref(g, cobj), rel,
                                        value=val),
                    ang / tol.angle + min(abs(plane_offset), 1.0) * 1e-3 + 0.01,
                    "translation"))
        elif isinstance(tm, CylinderManifold) and isinstance(f, (Line, Cylinder)):
            ang = _direction_mismatch(f.a, tm.a, tol)
            if ang is None:
                continue
            err = line_line_distance(f.p, f.a, tm.p, tm.a)
            if err > tol.position:
                continue
            score = err / tol.position + ang / tol.angle
            kind_bonus = 0.0 if isinstance(f, Cylinder) else 0.0005
            if isinstance(rm, OneParallel):
                for g in _constrained_cylinders(cobj):
                    out.append(ConstraintCandidate(
                        GeometricConstraint(ref(f, fobj), ref(g, cobj),
                                            Relation.CONCENTRIC),
                        score + kind_bonus, "translation"))
                for g in _constrained_lines(cobj):
                    out.append(ConstraintCandidate(
                        GeometricConstraint(ref(f, fobj), ref(g, cobj),
                                            Relation.DISTANCE, value=tm.r),
                        score + 0.001, "translation"))
            for g in _constrained_points(cobj):
                out.append(ConstraintCandidate(
                    GeometricConstraint(ref(f, fobj), ref(g, cobj),
                                        Relation.DISTANCE, value=tm.r),
                    score + 0.002, "translation"))
    return out


def _rotation_candidates(model, fobj, cobj, tol):
    rm = model.rotation
    tm = model.translation
    if isinstance(rm, FullSO3):
        return []
    out = []
    for f in fobj.shapes:
        d_f = shape_direction(f)
        if d_f is None:
            continue
        aligned = angle_between(d_f, rm.v_f) <= tol.angle
        flipped = angle_between(-d_f, rm.v_f) <= tol.angle
        if not (aligned or flipped):
            continue
        ang = angle_between(d_f if aligned else -d_f, rm.v_f)
        for g in cobj.shapes:
            d_c = shape_direction(g)
            if d_c is None or not _is_body_axis(d_c):
                continue
            kind_bonus = 0.0 if type(f).__name__ == type(g).__name__ else 0.01
            if isinstance(rm, OneParallel):
                # a line-line distance pins rotation and radius together when
                # the fixed axis threads the circular translation manifold
                if isinstance(f, (Line, Cylinder)) and isinstance(g, (Line, Cylinder)) \
                        and isinstance(tm, (CircleManifold, CylinderManifold)):
                    axis = f.a
                    center_err = line_line_distance(f.p, axis, tm.p,
                                                    getattr(tm, "a", axis))
                    if isinstance(tm, CircleManifold):
                        center_err = float(np.linalg.norm(
                            tm.p - (f.p + ((tm.p - f.p) @ axis) * axis)))
                    if center_err <= tol.position:
                        out.append(ConstraintCandidate(
                            GeometricConstraint(ShapeRef(fobj.name, f.name),
                                                ShapeRef(cobj.name, g.name),
                                                Relation.DISTANCE, value=tm.r),
                            ang / tol.angle + kind_bonus, "rotation"))
                        continue
                out.append(ConstraintCandidate(
                    GeometricConstraint(ShapeRef(fobj.name, f.name),
                                        ShapeRef(cobj.name, g.name),
                                        Relation.PARALLEL),
                    ang / tol.angle + kind_bonus + 0.005, "rotation"))
            else:  # OneAngle
                if aligned:
                    value, interval = rm.theta, rm.interval
                else:
                    if rm.interval is not None:
                        interval = (math.pi - rm.interval[1], math.pi - rm.interval[0])
                        value = None
                    else:
                        value, interval = math.pi - rm.theta, None
                if interval is not None:
                    constraint = GeometricConstraint(
                        ShapeRef(fobj.name, f.name), ShapeRef(cobj.name, g.name),
                        Relation.ANGLE, interval=interval)
                elif abs(value) <= 1e-9:
                    constraint = GeometricConstraint(
                        ShapeRef(fobj.name, f.name), ShapeRef(cobj.name, g.name),
                        Relation.PARALLEL)
                else:
                    constraint = GeometricConstraint(
                        ShapeRef(fobj.name, f.name), ShapeRef(cobj.name, g.name),
                        Relation.ANGLE, value=value)
                out.append(ConstraintCandidate(
                    constraint, ang / tol.angle + kind_bonus, "rotation"))
    return out


def _bound_candidates(model, fobj, cobj, tol):
    """Interval distance constraints expressing bounds on linear free dims."""
    tm = model.translation
    if translation_dim(tm) >= 3 or not tm.bounds:
        return []
    axis = getattr(tm, "a", None)
    if axis is None:
        return []
    dim = "axial" if isinstance(tm, CylinderManifold) else "t"
    lohi = tm.bounds.get(dim)
    if lohi is None:
        return []
    out = []
    for f in fobj.shapes:
        if not isinstance(f, Plane):
            continue
        ang = _direction_mismatch(f.n, axis, tol)
        if ang is None:
            continue
        tau = 1.0 if axis @ f.n > 0 else -1.0
        off = float((tm.p - f.p) @ axis)
        vals = sorted((tau * (lohi[0] + off), tau * (lohi[1] + off)))
        targets = [(g, float(g.p @ g.n), 0.0) for g in _constrained_planes(cobj)
                   if _is_body_axis(g.n)]
        targets += [(g, 0.0, 0.01) for g in _constrained_points(cobj)]
        for g, offset_c, extra in targets:
            interval = (vals[0] + offset_c, vals[1] + offset_c)
            # prefer the fixed plane giving the most symmetric interval
            # (Fig-3 style +-H/2 around a midplane)
            center_pref = min(abs(interval[0] + interval[1]) / 2.0, 1.0) * 0.01
            out.append(ConstraintCandidate(
                GeometricConstraint(ShapeRef(fobj.name, f.name),
                                    ShapeRef(cobj.name, g.name),
                                    Relation.DISTANCE, interval=interval),
                ang / tol.angle + extra + center_pref, "bound"))
    return out


def map_to_constraints(model: NullspaceModel, scene: Scene,
                       fixed: str | None = None, constrained: str | None = None,
                       tol: MatchTolerance = MatchTolerance()):
    """All scene constraints whose induced nullspace matches the model.

    Returns ConstraintCandidate entries ranked by parameter distance (best
    first); empty when nothing in the scene matches within tolerance.
    """
    fixed_objs = [scene.object(fixed)] if fixed else list(scene.objects)
    cons_objs = [scene.object(constrained)] if constrained else list(scene.objects)
    out = []
    for fobj in fixed_objs:
        for cobj in cons_objs:
            if fobj.name == cobj.name:
                continue
            out.extend(_translation_candidates(model, fobj, cobj, tol))
            out.extend(_rotation_candidates(model, fobj, cobj, tol))
            out.extend(_bound_candidates(model, fobj, cobj, tol))
    out.sort(key=lambda c: (c.score, str(c.constraint.fixed),
                            str(c.constraint.constrained)))
    return out


def _implies_one_parallel(c: GeometricConstraint, scene: Scene) -> bool:
    """Does this translation-grounding constraint already force OneParallel?"""
    if c.relation is Relation.CONCENTRIC:
        return True
    f = scene.resolve(c.fixed)
    g = scene.resolve(c.constrained)
    if c.relation in (Relation.COINCIDENT, Relation.DISTANCE):
        if isinstance(f, Plane) and isinstance(g, Plane):
            return True
        if isinstance(f, (Line, Cylinder)) and isinstance(g, (Line, Cylinder)):
            return True
    return False


def assemble_constraints(model: NullspaceModel, scene: Scene,
                         fixed: str, constrained: str,
                         tol: MatchTolerance = MatchTolerance()):
    """Best consistent constraint set explaining a fitted nullspace.

    Picks the top-ranked translation grounding, adds a rotation constraint
    unless the translation constraint already implies it, and appends any
    expressible interval bounds.  Returns a (possibly empty) tuple.
    """
    cands = map_to_constraints(model, scene, fixed, constrained, tol)
    chosen = []
    translation = next((c for c in cands if c.kind == "translation"), None)
    if translation is not None:
        chosen.append(translation.constraint)
    rotation_needed = not isinstance(model.rotation, FullSO3)
    if translation is not None and isinstance(model.rotation, OneParallel) \
            and _implies_one_parallel(translation.constraint, scene):
        rotation_needed = False
    if rotation_needed:
        rot = next((c for c in cands if c.kind == "rotation"), None)
        if rot is not None:
            chosen.append(rot.constraint)
    for c in cands:
        if c.kind == "bound":
            chosen.append(c.constraint)
            break
    return tuple(chosen)
