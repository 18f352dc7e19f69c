"""Skill models: named constraint sets with their nullspaces and parameters.

The six built-in templates mirror the basic manipulation skills: grasp,
place, move (discrete) and pull, mix, pour (continuous).  Templates are
parameterized (radius, height, angle sweeps) and can be re-parameterized
after learning through edit_parameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constraints import (ConstraintCandidate, GeometricConstraint,
                          MatchTolerance, Relation, Scene, ShapeRef,
                          assemble_constraints, derive_nullspace,
                          map_to_constraints)
from .fitting import CONTINUOUS, DISCRETE
from .geometry import Circle, Cylinder, Line, Plane, Point, angle_between
from .manifolds import (CircleManifold, CylinderManifold, ExtentBounds,
                        Full3Space, FullSO3, LineManifold, NullspaceModel,
                        OneAngle, OneParallel, PlaneManifold, PointManifold,
                        translation_dim)


@dataclass(frozen=True)
class TrajectorySpec:
    """Swept nullspace coordinate of a continuous skill."""

    parameter: str
    start: float
    end: float

    def waypoint_values(self, count: int) -> np.ndarray:
        if count < 1:
            raise ValueError("waypoint count must be at least 1")
        if count == 1:
            return np.array([self.end])
        return np.linspace(self.start, self.end, count)


@dataclass(frozen=True)
class SkillModel:
    name: str
    fixed_object: str
    constrained_object: str
    constraints: tuple[GeometricConstraint, ...]
    nullspace: NullspaceModel
    kind: str = DISCRETE
    trajectory: TrajectorySpec | None = None
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "params", tuple(self.params))
        if self.kind not in (DISCRETE, CONTINUOUS):
            raise ValueError(f"unknown skill kind {self.kind!r}")
        if self.kind == CONTINUOUS and self.trajectory is None:
            raise ValueError("continuous skill needs a trajectory spec")

    def param(self, name: str) -> float:
        for k, v in self.params:
            if k == name:
                return v
        raise KeyError(f"skill {self.name!r} has no parameter {name!r}")

    def param_names(self):
        return tuple(k for k, _ in self.params)


def check_consistency(skill: SkillModel, scene: Scene,
                      tol: MatchTolerance = MatchTolerance()) -> None:
    """Verify the constraint list and the stored nullspace agree.

    Re-derives the nullspace from the constraints (with the skill parameters
    applied) and compares manifold types, directions, anchors, radii, and
    bounds.  Raises ValueError on mismatch.
    """
    derived = derive_nullspace(skill.constraints, scene, dict(skill.params))
    tm, dm = skill.nullspace.translation, derived.translation
    if type(tm) is not type(dm):
        raise ValueError(f"translation manifold mismatch: stored "
                         f"{type(tm).__name__}, derived {type(dm).__name__}")
    if hasattr(tm, "a") and angle_between(tm.a, dm.a) > tol.angle \
            and angle_between(tm.a, -dm.a) > tol.angle:
        raise ValueError("translation axis mismatch")
    if hasattr(tm, "n") and angle_between(tm.n, dm.n) > tol.angle \
            and angle_between(tm.n, -dm.n) > tol.angle:
        raise ValueError("translation normal mismatch")
    if hasattr(tm, "r") and abs(tm.r - dm.r) > tol.position:
        raise ValueError(f"radius mismatch: stored {tm.r}, derived {dm.r}")
    if isinstance(tm, (PointManifold, CircleManifold)):
        if float(np.linalg.norm(tm.p - dm.p)) > tol.position:
            raise ValueError("manifold anchor mismatch")
    elif isinstance(tm, (LineManifold, CylinderManifold)):
        perp = (tm.p - dm.p) - ((tm.p - dm.p) @ dm.a) * dm.a
        if float(np.linalg.norm(perp)) > tol.position:
            raise ValueError("manifold axis position mismatch")
    elif isinstance(tm, PlaneManifold):
        if abs(float((tm.p - dm.p) @ dm.n)) > tol.position:
            raise ValueError("manifold plane offset mismatch")
    rm, dr = skill.nullspace.rotation, derived.rotation
    if type(rm) is not type(dr):
        raise ValueError(f"rotation manifold mismatch: stored "
                         f"{type(rm).__name__}, derived {type(dr).__name__}")
    if hasattr(rm, "v_f") and angle_between(rm.v_f, dr.v_f) > tol.angle:
        raise ValueError("rotation fixed direction mismatch")
    if isinstance(rm, OneAngle):
        si, di = rm.interval, dr.interval
        if (si is None) != (di is None):
            raise ValueError("angle interval presence mismatch")
        if si is not None and (abs(si[0] - di[0]) > tol.angle
                               or abs(si[1] - di[1]) > tol.angle):
            raise ValueError("angle interval mismatch")
        if si is None and abs(rm.theta - dr.theta) > tol.angle:
            raise ValueError("angle value mismatch")
    # bounds claimed by interval constraints must agree with stored bounds;
    # extra stored bounds (workspace boxes, trajectory extents) are fine
    for name in ("axial", "t"):
        db = getattr(dm, "bounds", ExtentBounds()).get(name)
        if db is None:
            continue
        sb = getattr(tm, "bounds", ExtentBounds()).get(name)
        if sb is None:
            raise ValueError(f"constraint claims a bound on {name!r} but the "
                             "nullspace has none")
        if abs(sb[0] - db[0]) > tol.position or abs(sb[1] - db[1]) > tol.position:
            raise ValueError(f"bound mismatch on {name!r}")


# ---------------------------------------------------------------------------
# Templates
# ---------------------------------------------------------------------------

def _shape(scene, obj, name, kind):
    s = scene.object(obj).shape(name)
    if not isinstance(s, kind):
        raise ValueError(f"{obj}/{name} must be a {kind.__name__}")
    return s


def grasp_template(scene: Scene, cup: str = "cup", gripper: str = "gripper",
                   radius: float | None = None, height: float | None = None,
                   standoff: float = 0.0) -> SkillModel:
    """Wrap the gripper around a cylindrical object.

    Concentric grip around the object axis plus a bounded palm offset along
    it; radius defaults to the object's cylinder radius plus the standoff.
    """
    body = _shape(scene, cup, "body", Cylinder)
    _shape(scene, gripper, "grip", Cylinder)
    palm = _shape(scene, gripper, "palm", Plane)
    radius = body.r + standoff if radius is None else float(radius)
    height = body.h if height is None else float(height)
    if radius <= 0 or height <= 0:
        raise ValueError("grasp radius and height must be positive")
    half = height / 2.0
    constraints = (
        GeometricConstraint(ShapeRef(cup, "body"), ShapeRef(gripper, "grip"),
                            Relation.CONCENTRIC),
        GeometricConstraint(ShapeRef(cup, "midplane"), ShapeRef(gripper, "palm"),
                            Relation.DISTANCE, interval=(-half, half)),
    )
    mid = _shape(scene, cup, "midplane", Plane)
    nullspace = NullspaceModel(
        CylinderManifold(mid.p, body.a, radius,
                         bounds=ExtentBounds.of(axial=(-half, half))),
        OneParallel(body.a, "+z"))
    return SkillModel("grasp", cup, gripper, constraints, nullspace,
                      params=(("radius", radius), ("height", height),
                              ("standoff", standoff)))


def place_template(scene: Scene, table: str = "table", cup: str = "cup",
                   extent: float = 0.25) -> SkillModel:
    """Put the object's bottom plane onto the support plane."""
    surface = _shape(scene, table, "surface", Plane)
    bottom = _shape(scene, cup, "bottom", Plane)
    constraints = (
        GeometricConstraint(ShapeRef(table, "surface"), ShapeRef(cup, "bottom"),
                            Relation.COINCIDENT),
    )
    offset_c = float(bottom.p @ bottom.n)
    nullspace = NullspaceModel(
        PlaneManifold(surface.p - offset_c * surface.n, surface.n,
                      bounds=ExtentBounds.of(u=(-extent, extent),
                                             v=(-extent, extent))),
        OneParallel(surface.n, "+z"))
    return SkillModel("place", table, cup, constraints, nullspace,
                      params=(("extent", extent),))


def move_template(scene: Scene, table: str = "table", cup: str = "cup",
                  extent: float = 0.25, lift: float = 0.05) -> SkillModel:
    """Carry the object while keeping it upright (free translation)."""
    surface = _shape(scene, table, "surface", Plane)
    _shape(scene, cup, "bottom", Plane)
    constraints = (
        GeometricConstraint(ShapeRef(table, "surface"), ShapeRef(cup, "bottom"),
                            Relation.PARALLEL),
    )
    nullspace = NullspaceModel(
        Full3Space(bounds=ExtentBounds.of(x=(-extent, extent),
                                          y=(-extent, extent),
                                          z=(lift, lift + 2 * extent))),
        OneParallel(surface.n, "+z"))
    return SkillModel("move", table, cup, constraints, nullspace,
                      params=(("extent", extent), ("lift", lift)))


def pull_template(scene: Scene, table: str = "table", gripper: str = "gripper",
                  length: float = 0.3, theta_min: float = 1.2,
                  theta_max: float = 1.5) -> SkillModel:
    """Drag along a line on the support with a banded gripper tilt."""
    line = _shape(scene, table, "pull-line", Line)
    _shape(scene, gripper, "center", Point)
    _shape(scene, gripper, "axis", Line)
    if not 0 <= theta_min <= theta_max <= math.pi:
        raise ValueError("need 0 <= theta_min <= theta_max <= pi")
    if length <= 0:
        raise ValueError("pull length must be positive")
    constraints = (
        GeometricConstraint(ShapeRef(table, "pull-line"), ShapeRef(gripper, "center"),
                            Relation.COINCIDENT),
        GeometricConstraint(ShapeRef(table, "pull-line"), ShapeRef(gripper, "axis"),
                            Relation.ANGLE, interval=(theta_min, theta_max)),
    )
    nullspace = NullspaceModel(
        LineManifold(line.p, line.a, bounds=ExtentBounds.of(t=(0.0, length))),
        OneAngle(line.a, 0.5 * (theta_min + theta_max),
                 interval=(theta_min, theta_max), selector="+z"))
    return SkillModel("pull", table, gripper, constraints, nullspace,
                      kind=CONTINUOUS,
                      trajectory=TrajectorySpec("t", 0.0, length),
                      params=(("length", length), ("theta_min", theta_min),
                              ("theta_max", theta_max)))


def mix_template(scene: Scene, cup: str = "cup", spoon: str = "spoon",
                 radius: float | None = None) -> SkillModel:
    """Stir: tool tip on a circle, tool axis parallel to the cup axis."""
    circle = _shape(scene, cup, "stir-circle", Circle)
    axis = _shape(scene, cup, "axis", Line)
    _shape(scene, spoon, "tip", Point)
    _shape(scene, spoon, "tool-axis", Line)
    radius = circle.r if radius is None else float(radius)
    if radius <= 0:
        raise ValueError("mix radius must be positive")
    constraints = (
        GeometricConstraint(ShapeRef(cup, "stir-circle"), ShapeRef(spoon, "tip"),
                            Relation.COINCIDENT),
        GeometricConstraint(ShapeRef(cup, "axis"), ShapeRef(spoon, "tool-axis"),
                            Relation.DISTANCE, value=radius),
    )
    nullspace = NullspaceModel(
        CircleManifold(circle.p, circle.n, radius),
        OneParallel(axis.a, "+z"))
    return SkillModel("mix", cup, spoon, constraints, nullspace,
                      kind=CONTINUOUS,
                      trajectory=TrajectorySpec("angle", 0.0, 2.0 * math.pi),
                      params=(("radius", radius),))


def pour_template(scene: Scene, cup: str = "cup", bottle: str = "bottle",
                  theta_end: float = 1.2) -> SkillModel:
    """Tip the bottle over a fixed point, sweeping the axis angle."""
    anchor = _shape(scene, cup, "pour-point", Point)
    axis = _shape(scene, cup, "axis", Line)
    _shape(scene, bottle, "mouth", Point)
    _shape(scene, bottle, "axis", Line)
    if not 0 < theta_end <= math.pi:
        raise ValueError("theta_end must lie in (0, pi]")
    constraints = (
        GeometricConstraint(ShapeRef(cup, "pour-point"), ShapeRef(bottle, "mouth"),
                            Relation.COINCIDENT),
        GeometricConstraint(ShapeRef(cup, "axis"), ShapeRef(bottle, "axis"),
                            Relation.ANGLE, interval=(0.0, theta_end)),
    )
    nullspace = NullspaceModel(
        PointManifold(anchor.p),
        OneAngle(axis.a, theta_end / 2.0, interval=(0.0, theta_end),
                 selector="+z"))
    return SkillModel("pour", cup, bottle, constraints, nullspace,
                      kind=CONTINUOUS,
                      trajectory=TrajectorySpec("theta", 0.0, theta_end),
                      params=(("theta_end", theta_end),))


_TEMPLATES = {
    "grasp": grasp_template,
    "place": place_template,
    "move": move_template,
    "pull": pull_template,
    "mix": mix_template,
    "pour": pour_template,
}

SKILL_NAMES = tuple(_TEMPLATES)


def skill_template(name: str, scene: Scene, **params) -> SkillModel:
    """Instantiate one of the six built-in skills against a scene."""
    try:
        builder = _TEMPLATES[name]
    except KeyError:
        raise ValueError(f"unknown skill template {name!r}; "
                         f"known: {', '.join(SKILL_NAMES)}") from None
    return builder(scene, **params)


# ---------------------------------------------------------------------------
# Parameter editing
# ---------------------------------------------------------------------------

def _set_param(params, name, value):
    return tuple((k, float(value) if k == name else v) for k, v in params)


def edit_parameter(skill: SkillModel, name: str, value: float) -> SkillModel:
    """Re-parameterize a skill; constraint values, nullspace, bounds, and the
    trajectory all reflect the new value."""
    value = float(value)
    if name not in skill.param_names():
        raise KeyError(f"skill {skill.name!r} has no parameter {name!r}; "
                       f"editable: {', '.join(skill.param_names())}")
    ns = skill.nullspace
    constraints = list(skill.constraints)
    trajectory = skill.trajectory

    if name in ("radius", "standoff"):
        radius = value if name == "radius" else skill.param("radius") \
            - skill.param("standoff") + value
        if radius <= 0:
            raise ValueError(f"radius must stay positive, got {radius}")
        tm = ns.translation
        if isinstance(tm, (CylinderManifold, CircleManifold)):
            ns = replace(ns, translation=replace(tm, r=radius))
        constraints = [replace(c, value=radius)
                       if c.relation is Relation.DISTANCE and c.value is not None
                       else c for c in constraints]
        params = _set_param(skill.params, name, value)
        params = _set_param(params, "radius", radius)
        return replace(skill, nullspace=ns, constraints=tuple(constraints),
                       params=params)

    if name == "height":
        if value <= 0:
            raise ValueError(f"height must stay positive, got {value}")
        half = value / 2.0
        tm = ns.translation
        ns = replace(ns, translation=replace(
            tm, bounds=tm.bounds.with_interval("axial", -half, half)))
        constraints = [replace(c, interval=(-half, half))
                       if c.relation is Relation.DISTANCE and c.interval is not None
                       else c for c in constraints]
        return replace(skill, nullspace=ns, constraints=tuple(constraints),
                       params=_set_param(skill.params, "height", value))

    if name in ("theta_end", "theta_min", "theta_max"):
        rm = ns.rotation
        if not isinstance(rm, OneAngle) or rm.interval is None:
            raise ValueError("skill has no angle interval to edit")
        lo, hi = rm.interval
        if name == "theta_end":
            lo2, hi2 = 0.0, value
        elif name == "theta_min":
            lo2, hi2 = value, hi
        else:
            lo2, hi2 = lo, value
        if not 0 <= lo2 <= hi2 <= math.pi:
            raise ValueError(f"need 0 <= theta_min <= theta_max <= pi, "
                             f"got [{lo2}, {hi2}]")
        ns = replace(ns, rotation=replace(rm, theta=0.5 * (lo2 + hi2),
                                          interval=(lo2, hi2)))
        constraints = [replace(c, interval=(lo2, hi2))
                       if c.relation is Relation.ANGLE else c
                       for c in constraints]
        if trajectory is not None and trajectory.parameter == "theta":
            trajectory = TrajectorySpec("theta", lo2, hi2)
        return replace(skill, nullspace=ns, constraints=tuple(constraints),
                       trajectory=trajectory,
                       params=_set_param(skill.params, name, value))

    if name == "length":
        if value <= 0:
            raise ValueError(f"length must stay positive, got {value}")
        tm = ns.translation
        ns = replace(ns, translation=replace(
            tm, bounds=tm.bounds.with_interval("t", 0.0, value)))
        if trajectory is not None and trajectory.parameter == "t":
            trajectory = TrajectorySpec("t", 0.0, value)
        return replace(skill, nullspace=ns, trajectory=trajectory,
                       params=_set_param(skill.params, "length", value))

    if name in ("extent", "lift"):
        if name == "extent" and value <= 0:
            raise ValueError(f"extent must stay positive, got {value}")
        extent = value if name == "extent" else skill.param("extent")
        lift = value if name == "lift" else \
            (skill.param("lift") if "lift" in skill.param_names() else None)
        tm = ns.translation
        bounds = tm.bounds
        for dim in ("x", "y", "u", "v"):
            if bounds.get(dim) is not None:
                bounds = bounds.with_interval(dim, -extent, extent)
        if lift is not None and bounds.get("z") is not None:
            bounds = bounds.with_interval("z", lift, lift + 2 * extent)
        ns = replace(ns, translation=replace(tm, bounds=bounds))
        return replace(skill, nullspace=ns,
                       params=_set_param(skill.params, name, value))

    raise KeyError(f"unhandled parameter {name!r}")


# ---------------------------------------------------------------------------
# Assembling a skill from a fitted nullspace
# ---------------------------------------------------------------------------

def _derived_params(model: NullspaceModel) -> tuple[tuple[str, float], ...]:
    params = []
    tm = model.translation
    if isinstance(tm, (CylinderManifold, CircleManifold)):
        params.append(("radius", tm.r))
    axial = getattr(tm, "bounds", ExtentBounds()).get("axial")
    if axial is not None:
        params.append(("height", axial[1] - axial[0]))
    if isinstance(model.rotation, OneAngle) and model.rotation.interval is not None:
        lo, hi = model.rotation.interval
        params.append(("theta_min", lo))
        params.append(("theta_max", hi))
    return tuple(params)


def skill_from_fit(name: str, model: NullspaceModel, scene: Scene,
                   fixed: str, constrained: str, kind: str = DISCRETE,
                   trajectory: TrajectorySpec | None = None,
                   tol: MatchTolerance = MatchTolerance()) -> SkillModel:
    """Ground a fitted (and bounded) nullspace in scene constraints."""
    constraints = assemble_constraints(model, scene, fixed, constrained, tol)
    if kind == CONTINUOUS and trajectory is None:
        trajectory = default_trajectory(model)
    return SkillModel(name, fixed, constrained, constraints, model, kind,
                      trajectory, _derived_params(model))


def default_trajectory(model: NullspaceModel) -> TrajectorySpec:
    """Trajectory spec from a bounded nullspace's natural swept coordinate."""
    tm = model.translation
    if isinstance(tm, LineManifold):
        lohi = tm.bounds.get("t") or (0.0, 0.0)
        return TrajectorySpec("t", lohi[0], lohi[1])
    if isinstance(tm, CircleManifold):
        lohi = tm.bounds.get("angle") or (0.0, 2.0 * math.pi)
        return TrajectorySpec("angle", lohi[0], lohi[1])
    if isinstance(model.rotation, OneAngle) and model.rotation.interval:
        lo, hi = model.rotation.interval
        return TrajectorySpec("theta", lo, hi)
    raise ValueError("nullspace has no natural trajectory coordinate")
