"""Execute skills on a simulated serial manipulator.

Hybrid solving: an exact stage samples candidate end-effector targets from
the skill nullspace, an iterative stage then optimizes the joint vector
against three priority tiers:

  1. joint limits and obstacle clearance (hard: clamping, barrier rows, and
     an exact post-check)
  2. the skill's geometric constraints, as smooth nullspace residuals
  3. posture optimality and successive-step distance (soft)

Tier weights are separated by at least 1e3 at the objective level, and a
result only counts as converged when tier 1 holds exactly and the tier-2
residual total is at or below 1e-6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constraints import (GeometricConstraint, Relation, Scene,
                          line_line_distance, shape_direction)
from .fitting import CONTINUOUS
from .geometry import (Circle, Cylinder, Line, Plane, Point, Pose, Rotation,
                       angle_between, compose, vec3)
from .manifolds import (CircleManifold, CylinderManifold, ExtentBounds,
                        LineManifold, NullspaceModel, OneAngle, SampleSpec,
                        dist_r, dist_t, project_translation,
                        rotation_residual_vec, sample_pose)
from .skills import SkillModel


@dataclass(frozen=True)
class JointSpec:
    """One revolute joint in standard (classic) DH parameters."""

    a: float          # link length
    alpha: float      # link twist
    d: float          # link offset
    theta0: float     # joint-angle offset added to q
    q_lo: float
    q_hi: float

    def __post_init__(self):
        vals = (self.a, self.alpha, self.d, self.theta0, self.q_lo, self.q_hi)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("joint parameters must be finite")
        if self.q_lo >= self.q_hi:
            raise ValueError(f"joint limits must satisfy q_lo < q_hi, "
                             f"got [{self.q_lo}, {self.q_hi}]")


@dataclass(frozen=True)
class KinematicChain:
    joints: tuple[JointSpec, ...]
    base: Pose = field(default_factory=Pose.identity)
    tool: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        if not self.joints:
            raise ValueError("chain needs at least one joint")

    @property
    def n(self) -> int:
        return len(self.joints)

    def limits(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([j.q_lo for j in self.joints]),
                np.array([j.q_hi for j in self.joints]))

    def midrange(self) -> np.ndarray:
        lo, hi = self.limits()
        return 0.5 * (lo + hi)

    def clamp(self, q: np.ndarray) -> np.ndarray:
        lo, hi = self.limits()
        return np.clip(q, lo, hi)


def _pose_matrix(p: Pose) -> np.ndarray:
    m = np.eye(4)
    m[:3, :3] = p.rotation.as_matrix()
    m[:3, 3] = p.translation
    return m


def _dh_matrix(j: JointSpec, q: float) -> np.ndarray:
    th = q + j.theta0
    ct, st = math.cos(th), math.sin(th)
    ca, sa = math.cos(j.alpha), math.sin(j.alpha)
    return np.array([
        [ct, -st * ca, st * sa, j.a * ct],
        [st, ct * ca, -ct * sa, j.a * st],
        [0.0, sa, ca, j.d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def _fk_matrices(chain: KinematicChain, q: np.ndarray) -> list[np.ndarray]:
    """Cumulative frames: base, after each link, then the tool frame."""
    frames = [_pose_matrix(chain.base)]
    m = frames[0]
    for joint, qi in zip(chain.joints, q):
        m = m @ _dh_matrix(joint, float(qi))
        frames.append(m)
    frames.append(m @ _pose_matrix(chain.tool))
    return frames


def _matrix_pose(m: np.ndarray) -> Pose:
    return Pose(m[:3, 3].copy(), Rotation.from_matrix(m[:3, :3]))


def forward_kinematics(chain: KinematicChain, q) -> tuple[Pose, tuple[Pose, ...]]:
    """End-effector pose and all per-link frames (base first, tool last)."""
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.size != chain.n:
        raise ValueError(f"expected {chain.n} joint values, got {q.size}")
    frames = _fk_matrices(chain, q)
    poses = tuple(_matrix_pose(m) for m in frames)
    return poses[-1], poses


def collision_points(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    """Link frame origins plus midpoints of consecutive frames, (m, 3)."""
    frames = _fk_matrices(chain, q)
    pts = np.array([m[:3, 3] for m in frames])
    mids = 0.5 * (pts[1:] + pts[:-1])
    return np.vstack([pts, mids])


@dataclass(frozen=True)
class Obstacle:
    center: np.ndarray
    radius: float
    margin: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", vec3(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "margin", float(self.margin))
        if self.radius <= 0:
            raise ValueError("obstacle radius must be positive")
        if self.margin < 0:
            raise ValueError("obstacle margin must be non-negative")

    @property
    def keepout(self) -> float:
        return self.radius + self.margin


@dataclass(frozen=True)
class PrioritySpec:
    """Objective-level tier weights; each tier at least 1e3 times the next."""

    tier1_weight: float = 1e6
    tier2_weight: float = 1.0
    tier3_weight: float = 1e-3
    separation: float = 1e3

    def __post_init__(self):
        if self.tier1_weight < self.separation * self.tier2_weight or \
                self.tier2_weight < self.separation * self.tier3_weight:
            raise ValueError("priority tiers must be separated by at least "
                             f"{self.separation}x")


@dataclass(frozen=True)
class SolveResult:
    q: np.ndarray
    ee: Pose
    residuals: dict
    converged: bool
    iterations: int
    sample_index: int = 0

    def tier2_total(self) -> float:
        t2 = self.residuals.get("tier2", {})
        return float(t2.get("nullspace_translation", 0.0)
                     + t2.get("nullspace_rotation", 0.0))


# ---------------------------------------------------------------------------
# Per-constraint residuals (report level)
# ---------------------------------------------------------------------------

def _point_of(s) -> np.ndarray:
    return s.p


def _signed_plane_offset(f: Plane, point: np.ndarray) -> float:
    return float((point - f.p) @ f.n)


def constraint_residual(c: GeometricConstraint, ee: Pose, scene: Scene) -> float:
    """Scalar violation of one constraint for a constrained object at `ee`.

    Valued relations return |measured - target|; interval relations return
    the distance outside the interval (zero inside).
    """
    f = scene.world_shape(c.fixed)
    obj = scene.object(c.constrained.obj)
    g_local = obj.shape(c.constrained.shape)
    g = g_local.transform(ee)

    rel = c.relation
    if rel in (Relation.ANGLE, Relation.PARALLEL):
        d_f, d_c = shape_direction(f), shape_direction(g)
        if d_f is None or d_c is None:
            raise ValueError(f"angle relation needs directed shapes: {c.describe()}")
        measured = angle_between(d_f, d_c)
        target_value = 0.0 if rel is Relation.PARALLEL else c.value
        return _violation(measured, target_value, c.interval if rel is Relation.ANGLE else None)

    if rel is Relation.CONCENTRIC:
        if not isinstance(f, (Line, Cylinder)) or not isinstance(g, (Line, Cylinder)):
            raise ValueError(f"concentric needs two axes: {c.describe()}")
        return line_line_distance(f.p, f.a, g.p, g.a)

    # distance / coincident
    measured = _measured_distance(f, g, c)
    target_value = 0.0 if rel is Relation.COINCIDENT else c.value
    return _violation(measured, target_value, c.interval)


def _measured_distance(f, g, c) -> float:
    if isinstance(f, Point) and isinstance(g, Point):
        return float(np.linalg.norm(f.p - g.p))
    if isinstance(f, Circle) and isinstance(g, Point):
        return dist_t(CircleManifold(f.p, f.n, f.r), g.p)
    if isinstance(f, (Line, Cylinder)) and isinstance(g, Point):
        d = g.p - f.p
        return float(np.linalg.norm(d - (d @ f.a) * f.a))
    if isinstance(f, (Line, Cylinder)) and isinstance(g, (Line, Cylinder)):
        return line_line_distance(f.p, f.a, g.p, g.a)
    if isinstance(f, Plane) and isinstance(g, (Point, Line, Cylinder)):
        return _signed_plane_offset(f, g.p)
    if isinstance(f, Plane) and isinstance(g, Plane):
        return _signed_plane_offset(f, g.p)
    raise ValueError(f"unsupported relation {c.describe()}")


def _violation(measured: float, value: float | None, interval) -> float:
    if interval is not None:
        lo, hi = interval
        if measured < lo:
            return lo - measured
        if measured > hi:
            return measured - hi
        return 0.0
    return abs(measured - value)


# ---------------------------------------------------------------------------
# Iterative stage
# ---------------------------------------------------------------------------

_OBSTACLE_BUFFER = 1e-4  # drive clearance slightly past the hard keepout


def _pose_rows(target: Pose, actual_m: np.ndarray) -> np.ndarray:
    dp = actual_m[:3, 3] - target.translation
    q_actual = Rotation.from_matrix(actual_m[:3, :3]).quat
    q_target = target.rotation.quat
    dq = q_actual - q_target
    dq_alt = q_actual + q_target
    if np.linalg.norm(dq_alt) < np.linalg.norm(dq):
        dq = dq_alt
    return np.concatenate([dp, dq])


def _gauss_newton(rows_fn, q0, chain, max_iterations, done_fn=None, tol=1e-13):
    """Damped Gauss-Newton over joint space with hard limit clamping.

    `done_fn(q)` may declare success early (e.g. tier checks already met);
    the iteration cap is a ceiling, not a typical count.
    """
    q = chain.clamp(np.asarray(q0, dtype=float))
    r = rows_fn(q)
    cost = float(r @ r)
    lam = 1e-6
    iterations = 0
    h = 1e-7
    for _ in range(max_iterations):
        if done_fn is not None and done_fn(q):
            break
        jac = np.empty((r.size, q.size))
        for j in range(q.size):
            qp = q.copy();  qp[j] += h
            jac[:, j] = (rows_fn(qp) - r) / h
        g = jac.T @ r
        if np.max(np.abs(g)) < 1e-12:
            break
        jtj = jac.T @ jac
        accepted = False
        for _ in range(25):
            try:
                step = np.linalg.solve(jtj + lam * np.eye(q.size), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            q_new = chain.clamp(q + step)
            r_new = rows_fn(q_new)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                accepted = True
                break
            lam *= 5
            if lam > 1e12:
                break
        if not accepted:
            break
        iterations += 1
        moved = float(np.linalg.norm(q_new - q))
        improvement = cost - cost_new
        q, r, cost = q_new, r_new, cost_new
        lam = max(lam / 3, 1e-9)
        if moved < tol or improvement < tol * max(cost, 1e-30):
            break
    return q, iterations


def _relative_matrix(fixed_world_inv: np.ndarray, ee_m: np.ndarray) -> Pose:
    rel = fixed_world_inv @ ee_m
    return _matrix_pose(rel)


def _solve_once(skill, chain, scene, obstacles, priorities, target_world,
                q0, q_prev, max_iterations, warm=False):
    fixed_pose = scene.object(skill.fixed_object).pose
    fixed_inv = np.linalg.inv(_pose_matrix(fixed_pose))
    model = skill.nullspace
    lo, hi = chain.limits()
    mid, span = chain.midrange(), hi - lo
    w1 = math.sqrt(priorities.tier1_weight)
    w2 = math.sqrt(priorities.tier2_weight)
    w3 = math.sqrt(priorities.tier3_weight)

    def obstacle_rows(q):
        if not obstacles:
            return np.empty(0)
        pts = collision_points(chain, q)
        rows = []
        for ob in obstacles:
            dist = np.linalg.norm(pts - ob.center, axis=1)
            rows.append(np.maximum(0.0, ob.keepout + _OBSTACLE_BUFFER - dist))
        return np.concatenate(rows)

    def tier3_rows(q):
        rows = [(q - mid) / span]
        if q_prev is not None:
            rows.append(q - q_prev)
        return np.concatenate(rows)

    def ik_rows(q):
        m = _fk_matrices(chain, q)[-1]
        return np.concatenate([_pose_rows(target_world, m),
                               w1 * obstacle_rows(q),
                               w3 * tier3_rows(q)])

    def refine_rows(q):
        m = _fk_matrices(chain, q)[-1]
        rel = _relative_matrix(fixed_inv, m)
        t_res = project_translation(model.translation, rel.translation,
                                    bounded=True) - rel.translation
        r_res = rotation_residual_vec(model.rotation, rel.rotation)
        return np.concatenate([w2 * t_res, w2 * r_res,
                               w1 * obstacle_rows(q),
                               w3 * tier3_rows(q)])

    def polish_rows(q):
        # tier 3 dropped: the soft terms pick the basin during refinement but
        # must not hold tier 2 away from exact satisfaction
        m = _fk_matrices(chain, q)[-1]
        rel = _relative_matrix(fixed_inv, m)
        t_res = project_translation(model.translation, rel.translation,
                                    bounded=True) - rel.translation
        r_res = rotation_residual_vec(model.rotation, rel.rotation)
        return np.concatenate([w2 * t_res, w2 * r_res, w1 * obstacle_rows(q)])

    def satisfied(q):
        m = _fk_matrices(chain, q)[-1]
        rel = _relative_matrix(fixed_inv, m)
        if dist_t(model.translation, rel.translation, bounded=True) \
                + dist_r(model.rotation, rel.rotation) > 5e-7:
            return False
        if obstacles and float(np.max(obstacle_rows(q))) > 0.0:
            return False
        return True

    budget_ik = 0 if warm else max_iterations * 2 // 5
    budget_refine = (max_iterations - budget_ik) * 2 // 3
    budget_polish = max_iterations - budget_ik - budget_refine
    it1 = 0
    q = chain.clamp(np.asarray(q0, dtype=float))
    if budget_ik:
        # warm starts (trajectory tracking) skip the pose-target stage and
        # follow the nullspace residual directly from the previous solution
        q, it1 = _gauss_newton(ik_rows, q, chain, budget_ik, done_fn=satisfied)
    q, it2 = _gauss_newton(refine_rows, q, chain, budget_refine,
                           done_fn=satisfied)
    q, it3 = _gauss_newton(polish_rows, q, chain, budget_polish,
                           done_fn=satisfied)

    ee, _ = forward_kinematics(chain, q)
    rel = _relative_matrix(fixed_inv, _fk_matrices(chain, q)[-1])
    d_t = dist_t(model.translation, rel.translation, bounded=True)
    d_r = dist_r(model.rotation, rel.rotation)

    pts = collision_points(chain, q)
    worst_penetration = 0.0
    for ob in obstacles:
        dist = np.linalg.norm(pts - ob.center, axis=1)
        worst_penetration = max(worst_penetration,
                                float(np.max(ob.keepout - dist, initial=0.0)))
    limit_violation = float(np.max(np.maximum(lo - q, q - hi), initial=0.0))
    limit_violation = max(limit_violation, 0.0)

    per_constraint = {}
    for c in skill.constraints:
        try:
            per_constraint[c.describe()] = constraint_residual(c, ee, scene)
        except ValueError:
            pass

    residuals = {
        "tier1": {"joint_limits": limit_violation,
                  "collision": worst_penetration},
        "tier2": {"nullspace_translation": d_t, "nullspace_rotation": d_r,
                  **per_constraint},
        "tier3": {"posture": float(np.linalg.norm((q - mid) / span)),
                  "step_distance": (float(np.linalg.norm(q - q_prev))
                                    if q_prev is not None else 0.0)},
    }
    tier1_ok = limit_violation == 0.0 and worst_penetration <= 0.0
    converged = bool(tier1_ok and (d_t + d_r) <= 1e-6)
    return SolveResult(q, ee, residuals, converged, it1 + it2 + it3), tier1_ok


def solve(skill: SkillModel, chain: KinematicChain, scene: Scene,
          obstacles=(), priorities: PrioritySpec = PrioritySpec(),
          seed: int = 0, q0=None, sample_budget: int = 32,
          max_iterations: int = 500,
          sample_spec: SampleSpec = SampleSpec(),
          q_prev=None) -> SolveResult:
    """Solve one skill: sample nullspace targets, optimize joints per tier.

    Deterministic for identical inputs and seed.  Returns the best candidate
    with converged=False when no sample satisfies tier 1 exactly and tier 2
    within 1e-6 inside the sample budget.
    """
    target_rng = np.random.default_rng([seed, 0])
    start_rng = np.random.default_rng([seed, 1])
    fixed_pose = scene.object(skill.fixed_object).pose
    q_base = chain.midrange() if q0 is None else np.asarray(q0, dtype=float)
    lo, hi = chain.limits()
    best = None
    best_key = None
    for attempt in range(sample_budget):
        rel_target = sample_pose(skill.nullspace, sample_spec, target_rng)
        target_world = compose(fixed_pose, rel_target)
        # multi-start: later attempts perturb the start configuration so a
        # single bad basin cannot consume the whole retry budget
        if attempt == 0:
            q_start = q_base
        else:
            q_start = np.clip(q_base + start_rng.normal(0.0, 0.5, chain.n),
                              lo, hi)
        warm = q_prev is not None and attempt == 0
        result, tier1_ok = _solve_once(skill, chain, scene, obstacles,
                                       priorities, target_world, q_start,
                                       q_prev, max_iterations, warm=warm)
        result = replace(result, sample_index=attempt)
        if result.converged:
            return result
        key = (0 if tier1_ok else 1, result.tier2_total())
        if best_key is None or key < best_key:
            best, best_key = result, key
    return best


def pin_trajectory_value(skill: SkillModel, parameter: str,
                         value: float) -> SkillModel:
    """Restrict the swept nullspace coordinate to a single waypoint value."""
    ns = skill.nullspace
    if parameter == "theta":
        rm = ns.rotation
        if not isinstance(rm, OneAngle):
            raise ValueError("no angle coordinate to pin")
        ns = replace(ns, rotation=replace(rm, theta=value, interval=(value, value)))
    else:
        tm = ns.translation
        ns = replace(ns, translation=replace(
            tm, bounds=tm.bounds.with_interval(parameter, value, value)))
    return replace(skill, nullspace=ns)


def solve_trajectory(skill: SkillModel, chain: KinematicChain, scene: Scene,
                     obstacles=(), priorities: PrioritySpec = PrioritySpec(),
                     seed: int = 0, waypoints: int = 10,
                     sample_budget: int = 32, max_iterations: int = 500,
                     sample_spec: SampleSpec = SampleSpec()) -> list[SolveResult]:
    """Solve a continuous skill waypoint by waypoint along its trajectory.

    Consecutive solutions are tied together by the tier-3 step-distance term
    and warm starts.  Stops at the first waypoint whose hard tier cannot be
    satisfied; the failed result is the last list entry.
    """
    if skill.kind != CONTINUOUS or skill.trajectory is None:
        raise ValueError("solve_trajectory needs a continuous skill")
    values = skill.trajectory.waypoint_values(waypoints)
    results: list[SolveResult] = []
    q_prev = None
    for k, value in enumerate(values):
        pinned = pin_trajectory_value(skill, skill.trajectory.parameter,
                                      float(value))
        res = solve(pinned, chain, scene, obstacles, priorities,
                    seed=seed + k, q0=q_prev, sample_budget=sample_budget,
                    max_iterations=max_iterations, sample_spec=sample_spec,
                    q_prev=q_prev)
        results.append(res)
        if not res.converged:
            break
        q_prev = res.q
    return results
