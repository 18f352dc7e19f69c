"""Fit demonstrations to nullspace models.

The per-sample objective is the combined residual

    dist_t(phi_T, u_i) + weight * dist_r(phi_R, v_c, R_i)

minimized over the manifold parameters by damped least squares with numerical
Jacobians; unit-vector parameter blocks are renormalized after every step.
Model selection walks a grid of (translation, rotation) candidates ordered by
combined nullspace dimension, most restrictive first, and returns the first
candidate whose RMS residual passes the acceptance threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .geometry import Pose, perpendicular_to, unit, vec3
from .manifolds import (CircleManifold, CylinderManifold, ExtentBounds,
                        Full3Space, FullSO3, LineManifold, NullspaceModel,
                        OneAngle, OneParallel, PlaneManifold, PointManifold,
                        RotationManifold, TranslationManifold, angles_to_many,
                        constrained_axis, dist_r, dist_t_many, free_dims,
                        project_translation, rotation_coords,
                        translation_coords)

TWO_PI = 2.0 * math.pi


class TranslationModel(str, Enum):
    POINT = "point"
    LINE = "line"
    CIRCLE = "circle"
    PLANE = "plane"
    CYLINDER = "cylinder"
    FULL3SPACE = "full3space"


class RotationModel(str, Enum):
    ONE_PARALLEL = "one_parallel"
    ONE_ANGLE = "one_angle"
    FULL_SO3 = "full_so3"


DISCRETE = "discrete"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class Demonstration:
    """Relative poses of the constrained frame expressed in the fixed frame."""

    samples: tuple[Pose, ...]
    kind: str = DISCRETE
    fixed_label: str = ""
    constrained_label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValueError("demonstration needs at least one sample")
        if self.kind not in (DISCRETE, CONTINUOUS):
            raise ValueError(f"unknown demonstration kind {self.kind!r}")
        if self.kind == CONTINUOUS:
            stamps = [p.stamp for p in self.samples]
            if any(s is None for s in stamps):
                raise ValueError("continuous demonstration requires timestamps")
            if any(b < a for a, b in zip(stamps, stamps[1:])):
                raise ValueError("timestamps must be non-decreasing")

    def __len__(self):
        return len(self.samples)

    def translations(self) -> np.ndarray:
        return np.array([p.translation for p in self.samples])

    def constrained_axes(self, selector: str = "+z") -> np.ndarray:
        return np.array([constrained_axis(p.rotation, selector) for p in self.samples])


@dataclass(frozen=True)
class FitConfig:
    translation_candidates: tuple[TranslationModel, ...] = (
        TranslationModel.POINT, TranslationModel.LINE, TranslationModel.CIRCLE,
        TranslationModel.PLANE, TranslationModel.CYLINDER, TranslationModel.FULL3SPACE)
    rotation_candidates: tuple[RotationModel, ...] = (
        RotationModel.ONE_PARALLEL, RotationModel.ONE_ANGLE, RotationModel.FULL_SO3)
    tau: float = 5e-3
    rotation_weight: float = 1.0
    max_iterations: int = 200
    gradient_tol: float = 1e-14
    step_tol: float = 1e-14
    cost_tol: float = 1e-18
    selector: str = "+z"
    bounds_margin: float = 0.05
    # an inferred angle interval wider than this is no restriction at all
    angle_coverage_max: float = 0.75 * math.pi
    radius_sanity_factor: float = 100.0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.rotation_weight < 0:
            raise ValueError("rotation weight must be non-negative")


@dataclass(frozen=True)
class FitResult:
    model: NullspaceModel
    residuals: np.ndarray
    rms: float
    converged: bool
    iterations: int
    cost_history: tuple[float, ...] = ()

    @property
    def translation(self):
        return self.model.translation

    @property
    def rotation(self):
        return self.model.rotation


# ---------------------------------------------------------------------------
# Damped least squares (Levenberg-Marquardt style)
# ---------------------------------------------------------------------------

def _numerical_jacobian(fn, x, step=1e-6):
    r0 = fn(x)
    jac = np.empty((r0.size, x.size))
    for j in range(x.size):
        xp = x.copy();  xp[j] += step
        xm = x.copy();  xm[j] -= step
        jac[:, j] = (fn(xp) - fn(xm)) / (2.0 * step)
    return jac


def _renormalize(x, unit_blocks):
    x = x.copy()
    for sl in unit_blocks:
        n = np.linalg.norm(x[sl])
        if n > 1e-12:
            x[sl] = x[sl] / n
    return x


def damped_least_squares(fn, x0, unit_blocks=(), max_iterations=200,
                         gradient_tol=1e-14, step_tol=1e-14, cost_tol=1e-18,
                         jac_step=1e-6):
    """Minimize sum(fn(x)^2) with adaptive damping.

    Returns (x, converged, iterations, cost_history).  Accepted iterations are
    strictly non-increasing in cost; on stall the best-so-far point is
    returned with converged=False.
    """
    x = _renormalize(np.asarray(x0, dtype=float), unit_blocks)
    r = fn(x)
    cost = float(r @ r)
    history = [cost]
    lam = 1e-3
    converged = False
    iterations = 0
    for _ in range(max_iterations):
        jac = _numerical_jacobian(fn, x, jac_step)
        g = jac.T @ r
        if np.max(np.abs(g)) <= gradient_tol:
            converged = True
            break
        jtj = jac.T @ jac
        scale = np.diag(np.maximum(np.diag(jtj), 1e-12))
        accepted = False
        for _ in range(40):
            try:
                step = np.linalg.solve(jtj + lam * scale, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = _renormalize(x + step, unit_blocks)
            r_new = fn(x_new)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                accepted = True
                break
            lam *= 4.0
            if lam > 1e15:
                break
        if not accepted:
            break
        iterations += 1
        improvement = cost - cost_new
        moved = float(np.linalg.norm(x_new - x))
        x, r, cost = x_new, r_new, cost_new
        history.append(cost)
        lam = max(lam / 3.0, 1e-12)
        if improvement <= cost_tol * max(cost, 1e-30) or moved <= step_tol:
            converged = True
            break
    else:
        converged = False
    return x, converged, iterations, tuple(history)


# ---------------------------------------------------------------------------
# Parameterizations: pack/unpack/seed per model type
# ---------------------------------------------------------------------------

_T_MIN_SAMPLES = {
    TranslationModel.POINT: 1, TranslationModel.LINE: 2,
    TranslationModel.CIRCLE: 3, TranslationModel.PLANE: 3,
    TranslationModel.CYLINDER: 5, TranslationModel.FULL3SPACE: 1,
}
_R_MIN_SAMPLES = {
    RotationModel.ONE_PARALLEL: 1, RotationModel.ONE_ANGLE: 3,
    RotationModel.FULL_SO3: 1,
}
_T_NPARAMS = {
    TranslationModel.POINT: 3, TranslationModel.LINE: 6,
    TranslationModel.CIRCLE: 7, TranslationModel.PLANE: 6,
    TranslationModel.CYLINDER: 7, TranslationModel.FULL3SPACE: 0,
}
_R_NPARAMS = {
    RotationModel.ONE_PARALLEL: 3, RotationModel.ONE_ANGLE: 4,
    RotationModel.FULL_SO3: 0,
}
_T_DIM = {
    TranslationModel.POINT: 0, TranslationModel.LINE: 1,
    TranslationModel.CIRCLE: 1, TranslationModel.PLANE: 2,
    TranslationModel.CYLINDER: 2, TranslationModel.FULL3SPACE: 3,
}
_R_DIM = {
    RotationModel.ONE_PARALLEL: 1, RotationModel.ONE_ANGLE: 2,
    RotationModel.FULL_SO3: 3,
}


def min_samples(model: TranslationModel | RotationModel) -> int:
    """Fewest independent samples that determine the model's parameters."""
    if isinstance(model, TranslationModel):
        return _T_MIN_SAMPLES[model]
    return _R_MIN_SAMPLES[model]


def _unpack_translation(model: TranslationModel, x) -> TranslationManifold:
    if model is TranslationModel.FULL3SPACE:
        return Full3Space()
    if model is TranslationModel.POINT:
        return PointManifold(x[0:3])
    if model is TranslationModel.LINE:
        return LineManifold(x[0:3], unit(x[3:6]))
    if model is TranslationModel.PLANE:
        return PlaneManifold(x[0:3], unit(x[3:6]))
    if model is TranslationModel.CIRCLE:
        return CircleManifold(x[0:3], unit(x[3:6]), max(abs(x[6]), 1e-9))
    if model is TranslationModel.CYLINDER:
        return CylinderManifold(x[0:3], unit(x[3:6]), max(abs(x[6]), 1e-9))
    raise ValueError(model)


def _pack_translation(m: TranslationManifold) -> np.ndarray:
    if isinstance(m, Full3Space):
        return np.empty(0)
    if isinstance(m, PointManifold):
        return m.p.copy()
    if isinstance(m, (LineManifold, CylinderManifold)):
        parts = [m.p, m.a] + ([np.array([m.r])] if isinstance(m, CylinderManifold) else [])
        return np.concatenate(parts)
    if isinstance(m, PlaneManifold):
        return np.concatenate([m.p, m.n])
    if isinstance(m, CircleManifold):
        return np.concatenate([m.p, m.n, [m.r]])
    raise TypeError(m)


def _unpack_rotation(model: RotationModel, x, selector) -> RotationManifold:
    if model is RotationModel.FULL_SO3:
        return FullSO3(selector)
    if model is RotationModel.ONE_PARALLEL:
        return OneParallel(unit(x[0:3]), selector)
    if model is RotationModel.ONE_ANGLE:
        theta = abs(float(x[3])) % TWO_PI
        if theta > math.pi:
            theta = TWO_PI - theta
        return OneAngle(unit(x[0:3]), theta, selector=selector)
    raise ValueError(model)


def _unit_blocks(model, offset):
    if isinstance(model, TranslationModel):
        if model in (TranslationModel.LINE, TranslationModel.PLANE,
                     TranslationModel.CIRCLE, TranslationModel.CYLINDER):
            return [slice(offset + 3, offset + 6)]
        return []
    if model in (RotationModel.ONE_PARALLEL, RotationModel.ONE_ANGLE):
        return [slice(offset, offset + 3)]
    return []


# ---------------------------------------------------------------------------
# Closed-form seeds
# ---------------------------------------------------------------------------

def _scatter_eigvecs(points: np.ndarray):
    """Eigenvectors of the centered scatter matrix, ascending eigenvalue order."""
    centered = points - points.mean(axis=0)
    cov = centered.T @ centered / max(len(points), 1)
    _, vecs = np.linalg.eigh(cov)
    return [vecs[:, i] for i in range(3)]


def _kasa_circle(xy: np.ndarray):
    """Algebraic 2D circle fit; exact on noiseless circles."""
    x, y = xy[:, 0], xy[:, 1]
    a_mat = np.column_stack([x, y, np.ones_like(x)])
    b = x * x + y * y
    sol, *_ = np.linalg.lstsq(a_mat, b, rcond=None)
    cx, cy = sol[0] / 2.0, sol[1] / 2.0
    r2 = sol[2] + cx * cx + cy * cy
    return np.array([cx, cy]), math.sqrt(max(r2, 1e-18))


def _cylinder_candidate(points: np.ndarray, axis: np.ndarray):
    axis = unit(axis)
    e1 = perpendicular_to(axis)
    e2 = np.cross(axis, e1)
    centroid = points.mean(axis=0)
    d = points - centroid
    xy = np.column_stack([d @ e1, d @ e2])
    center2d, r = _kasa_circle(xy)
    p = centroid + center2d[0] * e1 + center2d[1] * e2
    m = CylinderManifold(p, axis, max(r, 1e-9))
    cost = float(np.sum(dist_t_many(m, points) ** 2))
    return m, cost


def init_translation(demo: Demonstration, model: TranslationModel,
                     axis_hint: np.ndarray | None = None) -> TranslationManifold:
    """Closed-form parameter seed for a translation model."""
    n = len(demo)
    if n < _T_MIN_SAMPLES[model]:
        raise ValueError(f"insufficient data: {model.value} needs "
                         f"{_T_MIN_SAMPLES[model]} samples, got {n}")
    pts = demo.translations()
    centroid = pts.mean(axis=0)
    if model is TranslationModel.FULL3SPACE:
        return Full3Space()
    if model is TranslationModel.POINT:
        return PointManifold(centroid)
    vecs = _scatter_eigvecs(pts)
    if model is TranslationModel.LINE:
        return LineManifold(centroid, unit(vecs[2]))
    if model is TranslationModel.PLANE:
        return PlaneManifold(centroid, unit(vecs[0]))
    if model is TranslationModel.CIRCLE:
        normal = unit(vecs[0])
        e1 = perpendicular_to(normal)
        e2 = np.cross(normal, e1)
        d = pts - centroid
        center2d, r = _kasa_circle(np.column_stack([d @ e1, d @ e2]))
        p = centroid + center2d[0] * e1 + center2d[1] * e2
        return CircleManifold(p, normal, max(r, 1e-9))
    if model is TranslationModel.CYLINDER:
        candidates = list(vecs)
        if axis_hint is not None and np.linalg.norm(axis_hint) > 1e-9:
            candidates.insert(0, unit(axis_hint))
        best = min((_cylinder_candidate(pts, a) for a in candidates),
                   key=lambda mc: mc[1])
        return best[0]
    raise ValueError(model)


def init_rotation(demo: Demonstration, model: RotationModel,
                  selector: str = "+z") -> RotationManifold:
    """Closed-form parameter seed for a rotation model."""
    n = len(demo)
    if n < _R_MIN_SAMPLES[model]:
        raise ValueError(f"insufficient data: {model.value} needs "
                         f"{_R_MIN_SAMPLES[model]} samples, got {n}")
    if model is RotationModel.FULL_SO3:
        return FullSO3(selector)
    axes = demo.constrained_axes(selector)
    mean = axes.mean(axis=0)
    if model is RotationModel.ONE_PARALLEL:
        if np.linalg.norm(mean) < 1e-9:
            mean = _scatter_eigvecs(axes + 0.0)[2]
        return OneParallel(unit(mean), selector)
    # OneAngle: pick the candidate fixed direction whose fixed-angle residual
    # is smallest among the scatter eigenvectors (both signs) and the mean
    candidates = []
    _, vecs = np.linalg.eigh(axes.T @ axes / len(axes))
    for i in range(3):
        candidates.extend([vecs[:, i], -vecs[:, i]])
    if np.linalg.norm(mean) > 1e-9:
        candidates.append(unit(mean))
    best = None
    for cand in candidates:
        v = unit(cand)
        ang = angles_to_many(v, axes)
        theta = float(np.mean(ang))
        cost = float(np.sum((2.0 * np.sin((ang - theta) / 4.0)) ** 2))
        if best is None or cost < best[0]:
            best = (cost, v, theta)
    return OneAngle(best[1], min(max(best[2], 0.0), math.pi), selector=selector)


def init_params(demo: Demonstration, model: TranslationModel | RotationModel,
                selector: str = "+z") -> np.ndarray:
    """Closed-form seed as a flat parameter vector."""
    if isinstance(model, TranslationModel):
        return _pack_translation(init_translation(demo, model))
    m = init_rotation(demo, model, selector)
    if isinstance(m, FullSO3):
        return np.empty(0)
    if isinstance(m, OneParallel):
        return m.v_f.copy()
    return np.concatenate([m.v_f, [m.theta]])


# ---------------------------------------------------------------------------
# Residual evaluation
# ---------------------------------------------------------------------------

def _rot_residuals_many(m: RotationManifold, axes: np.ndarray) -> np.ndarray:
    """Vectorized dist_r over precomputed constrained axes.

    Equals the projection-based dist_r: the minimal correction rotates the
    constrained axis by delta = alpha - target, and the chordal quaternion
    distance of a rotation by delta is 2 |sin(delta / 4)|.
    """
    if isinstance(m, FullSO3):
        return np.zeros(len(axes))
    ang = angles_to_many(m.v_f, axes)
    if isinstance(m, OneParallel):
        delta = ang
    else:
        if m.interval is not None:
            lo, hi = m.interval
            delta = np.where(ang < lo, ang - lo, np.where(ang > hi, ang - hi, 0.0))
        else:
            delta = ang - m.theta
    return 2.0 * np.abs(np.sin(delta / 4.0))


def combined_residuals(demo: Demonstration, model: NullspaceModel,
                       cfg: FitConfig) -> np.ndarray:
    """Per-sample dist_t + weight * dist_r against a nullspace model."""
    res_t = dist_t_many(model.translation, demo.translations())
    res_r = np.array([dist_r(model.rotation, p.rotation) for p in demo.samples])
    return res_t + cfg.rotation_weight * res_r


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(v)))
    return -v if v[idx] < 0 else v


def _canonicalize_translation(m: TranslationManifold, pts: np.ndarray):
    """Resolve parameterization symmetries: anchor p near the data centroid,
    axis/normal sign with the largest component positive."""
    centroid = pts.mean(axis=0)
    if isinstance(m, LineManifold):
        a = _canonical_sign(m.a)
        p = m.p + ((centroid - m.p) @ a) * a
        return replace(m, p=p, a=a)
    if isinstance(m, PlaneManifold):
        n = _canonical_sign(m.n)
        p = centroid + ((m.p - centroid) @ n) * n
        return replace(m, p=p, n=n)
    if isinstance(m, CylinderManifold):
        a = _canonical_sign(m.a)
        p = m.p + ((centroid - m.p) @ a) * a
        return replace(m, p=p, a=a)
    if isinstance(m, CircleManifold):
        return replace(m, n=_canonical_sign(m.n))
    return m


# ---------------------------------------------------------------------------
# fit_manifold
# ---------------------------------------------------------------------------

def _canonicalize_rotation(rm: RotationManifold) -> RotationManifold:
    # (v, theta) and (-v, pi - theta) describe the same cone; keep the
    # small-angle orientation
    if isinstance(rm, OneAngle) and rm.interval is None and rm.theta > math.pi / 2:
        return replace(rm, v_f=-rm.v_f, theta=math.pi - rm.theta)
    return rm


def _finish(demo, tm, rm, cfg, converged, iterations, history) -> FitResult:
    tm = _canonicalize_translation(tm, demo.translations())
    rm = _canonicalize_rotation(rm)
    model = NullspaceModel(tm, rm, 0.0)
    residuals = combined_residuals(demo, model, cfg)
    rms = float(np.sqrt(np.mean(residuals ** 2)))
    model = replace(model, rms_fit_residual=rms)
    return FitResult(model, residuals, rms, converged, iterations, history)


def _fit_fixed(demo: Demonstration, t_model: TranslationModel,
               r_model: RotationModel, cfg: FitConfig) -> FitResult:
    pts = demo.translations()
    axes = demo.constrained_axes(cfg.selector)
    rot_seed = init_rotation(demo, r_model, cfg.selector)
    hint = getattr(rot_seed, "v_f", None)
    trans_seed = init_translation(demo, t_model, axis_hint=hint)

    x_t = _pack_translation(trans_seed)
    nt = x_t.size
    if r_model is RotationModel.FULL_SO3:
        x_r = np.empty(0)
    elif r_model is RotationModel.ONE_PARALLEL:
        x_r = rot_seed.v_f.copy()
    else:
        x_r = np.concatenate([rot_seed.v_f, [rot_seed.theta]])
    x0 = np.concatenate([x_t, x_r])
    blocks = _unit_blocks(t_model, 0) + _unit_blocks(r_model, nt)
    weight = cfg.rotation_weight

    def residual(x):
        tm = _unpack_translation(t_model, x[:nt])
        res = dist_t_many(tm, pts)
        if r_model is not RotationModel.FULL_SO3 and weight != 0.0:
            rm = _unpack_rotation(r_model, x[nt:], cfg.selector)
            res = res + weight * _rot_residuals_many(rm, axes)
        return res

    if x0.size == 0:
        return _finish(demo, _unpack_translation(t_model, x0),
                       _unpack_rotation(r_model, x0, cfg.selector),
                       cfg, True, 0, (float(np.sum(residual(x0) ** 2)),))

    x, converged, iterations, history = damped_least_squares(
        residual, x0, blocks, cfg.max_iterations, cfg.gradient_tol,
        cfg.step_tol, cfg.cost_tol)
    tm = _unpack_translation(t_model, x[:nt])
    rm = _unpack_rotation(r_model, x[nt:], cfg.selector)
    return _finish(demo, tm, rm, cfg, converged, iterations, history)


def fit_one_angle_interval(axes: np.ndarray, selector: str = "+z",
                           shrink_tol: float = 1e-10):
    """Fixed direction for an angle-interval band of constrained axes.

    Minimizes the largest angle to the fixed direction (smallest enclosing
    cone): the outer boundary ring of the band pins the axis far more tightly
    than the band width does, and the orientation ambiguity (v, theta) vs
    (-v, pi - theta) resolves itself toward the small-angle side.  Steepest
    8-direction pattern search on the sphere, multi-started from the mean
    axis and the scatter eigenvectors.  Returns (OneAngle with the observed
    [min, max] interval, width).
    """
    axes = np.asarray(axes, dtype=float)
    mean = axes.mean(axis=0)
    seeds = []
    if np.linalg.norm(mean) > 1e-9:
        seeds.append(unit(mean))
    _, vecs = np.linalg.eigh(axes.T @ axes / len(axes))
    for i in range(3):
        seeds.extend([vecs[:, i], -vecs[:, i]])

    def largest_angle(v):
        return float(angles_to_many(v, axes).max())

    probe = [(math.cos(k * math.pi / 4.0), math.sin(k * math.pi / 4.0))
             for k in range(8)]
    best_v, best_f = None, math.inf
    for seed in seeds:
        v = unit(seed)
        f = largest_angle(v)
        step = 0.3
        evals = 0
        while step > shrink_tol and evals < 30000:
            e1 = perpendicular_to(v)
            e2 = np.cross(v, e1)
            cands = [unit(v + step * (c * e1 + s * e2)) for c, s in probe]
            fs = [largest_angle(c) for c in cands]
            evals += 8
            k = int(np.argmin(fs))
            if fs[k] < f - 1e-15:
                v, f = cands[k], fs[k]
                step = min(step * 2.0, 0.3)
            else:
                step *= 0.5
        if f < best_f:
            best_v, best_f = v, f

    ang = angles_to_many(best_v, axes)
    lo, hi = float(ang.min()), float(ang.max())
    if 0.5 * (lo + hi) > math.pi / 2.0:  # canonical small-angle orientation
        best_v = -best_v
        lo, hi = math.pi - hi, math.pi - lo
    theta = 0.5 * (lo + hi)
    return OneAngle(best_v, theta, interval=(lo, hi), selector=selector), hi - lo


def _fit_interval_variant(demo: Demonstration, t_model: TranslationModel,
                          cfg: FitConfig) -> FitResult:
    """Translation fit plus the interval OneAngle band fit."""
    base = _fit_fixed(demo, t_model, RotationModel.FULL_SO3, cfg)
    axes = demo.constrained_axes(cfg.selector)
    rm, _width = fit_one_angle_interval(axes, cfg.selector)
    return _finish(demo, base.model.translation, rm, cfg,
                   base.converged, base.iterations, base.cost_history)


def fit_manifold(demo: Demonstration, t_model: TranslationModel,
                 r_model: RotationModel, cfg: FitConfig = FitConfig()) -> FitResult:
    """Fit one (translation, rotation) model pair to a demonstration.

    OneAngle is first fit with a single fixed angle; when that leaves the RMS
    above the acceptance threshold (angles genuinely spread, e.g. a pour
    sweep) the interval variant is fit instead and kept if it does better.
    """
    n = len(demo)
    for model in (t_model, r_model):
        if n < min_samples(model):
            raise ValueError(f"insufficient data: {model.value} needs "
                             f"{min_samples(model)} samples, got {n}")
    result = _fit_fixed(demo, t_model, r_model, cfg)
    if r_model is RotationModel.ONE_ANGLE and result.rms > cfg.tau:
        alt = _fit_interval_variant(demo, t_model, cfg)
        if alt.rms < result.rms:
            return alt
    return result


# ---------------------------------------------------------------------------
# Model selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CandidateReport:
    t_model: TranslationModel
    r_model: RotationModel
    rms: float | None
    passed: bool
    chosen: bool
    note: str = ""


def candidate_grid(cfg: FitConfig):
    """(translation, rotation) pairs ordered most restrictive first."""
    grid = []
    for ti, t in enumerate(cfg.translation_candidates):
        for ri, r in enumerate(cfg.rotation_candidates):
            grid.append((_T_DIM[t] + _R_DIM[r], ti, ri, t, r))
    grid.sort(key=lambda row: row[:3])
    return [(t, r) for _, _, _, t, r in grid]


def _data_extent(pts: np.ndarray) -> float:
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


def _sanity_note(result: FitResult, extent: float, cfg: FitConfig) -> str:
    tm = result.model.translation
    if isinstance(tm, (CircleManifold, CylinderManifold)):
        if tm.r > cfg.radius_sanity_factor * max(extent, 1e-6):
            return "degenerate radius"
    rm = result.model.rotation
    if isinstance(rm, OneAngle) and rm.interval is not None:
        if rm.interval[1] - rm.interval[0] > cfg.angle_coverage_max:
            return "angle interval covers nearly all orientations"
    return ""


def select_model(demo: Demonstration, cfg: FitConfig = FitConfig()) -> FitResult:
    result, _ = select_model_report(demo, cfg)
    return result


def select_model_report(demo: Demonstration, cfg: FitConfig = FitConfig()):
    """Most-restrictive-first selection with a per-candidate report table."""
    n = len(demo)
    extent = _data_extent(demo.translations())
    report: list[CandidateReport] = []
    fallback = (TranslationModel.FULL3SPACE, RotationModel.FULL_SO3)
    chosen: FitResult | None = None
    for t_model, r_model in candidate_grid(cfg):
        if (t_model, r_model) == fallback:
            continue  # the unconstrained pair is only ever the fallback
        need = max(min_samples(t_model), min_samples(r_model))
        if n < need:
            report.append(CandidateReport(t_model, r_model, None, False, False,
                                          "insufficient data"))
            continue
        result = fit_manifold(demo, t_model, r_model, cfg)
        note = _sanity_note(result, extent, cfg)
        passed = result.rms <= cfg.tau and not note
        report.append(CandidateReport(t_model, r_model, result.rms, passed,
                                      False, note))
        if passed:
            chosen = result
            report[-1] = replace(report[-1], chosen=True)
            break
    if chosen is None:
        model = NullspaceModel(Full3Space(), FullSO3(cfg.selector), 0.0)
        residuals = combined_residuals(demo, model, cfg)
        rms = float(np.sqrt(np.mean(residuals ** 2)))
        model = replace(model, rms_fit_residual=rms)
        chosen = FitResult(model, residuals, rms, False, 0)
        report.append(CandidateReport(*fallback, rms, True, True, "fallback"))
    return chosen, report


# ---------------------------------------------------------------------------
# Bounds inference
# ---------------------------------------------------------------------------

def _interval_with_margin(values: np.ndarray, margin: float):
    lo, hi = float(values.min()), float(values.max())
    pad = margin * (hi - lo) / 2.0
    return lo - pad, hi + pad


def infer_bounds(demo: Demonstration, model: NullspaceModel,
                 cfg: FitConfig = FitConfig()) -> NullspaceModel:
    """Attach data-extent bounds to every free dimension of the model.

    Each bound is the [min, max] of the demonstrated coordinate, widened by
    half the margin fraction of the span on each side.  Angle dimensions that
    effectively cover the full turn are left unbounded.
    """
    tm = model.translation
    pts = demo.translations()
    bounds = ExtentBounds()
    coords = [translation_coords(tm, p) for p in pts]
    for name, compact in free_dims(tm):
        values = np.array([c[name] for c in coords])
        if compact:
            values = np.unwrap(values)
            if values.max() - values.min() >= TWO_PI * 0.98:
                continue
        lo, hi = _interval_with_margin(values, cfg.bounds_margin)
        bounds = bounds.with_interval(name, lo, hi)
    tm = replace(tm, bounds=bounds)

    rm = model.rotation
    if isinstance(rm, OneAngle):
        thetas = np.array([rotation_coords(rm, p.rotation)["theta"]
                           for p in demo.samples])
        lo, hi = _interval_with_margin(thetas, cfg.bounds_margin)
        lo, hi = max(lo, 0.0), min(hi, math.pi)
        rm = replace(rm, theta=0.5 * (lo + hi), interval=(lo, hi))
    return replace(model, translation=tm, rotation=rm)


# ---------------------------------------------------------------------------
# Trajectory ordering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Waypoint:
    stamp: float
    primary: float
    arc_length: float
    coords: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class Trajectory:
    parameter: str
    waypoints: tuple[Waypoint, ...]

    @property
    def start(self) -> float:
        return self.waypoints[0].primary

    @property
    def end(self) -> float:
        return self.waypoints[-1].primary


def trajectory_parameter(model: NullspaceModel) -> str:
    """Which manifold coordinate a continuous skill sweeps."""
    tm = model.translation
    if isinstance(tm, LineManifold):
        return "t"
    if isinstance(tm, CircleManifold):
        return "angle"
    if isinstance(tm, CylinderManifold):
        return "axial"
    if isinstance(tm, PointManifold) and isinstance(model.rotation, OneAngle):
        return "theta"
    if isinstance(model.rotation, OneAngle):
        return "theta"
    return "s"


def order_trajectory(demo: Demonstration, model: NullspaceModel) -> Trajectory:
    """Map a continuous demonstration to its nullspace coordinates, in time order."""
    if demo.kind != CONTINUOUS:
        raise ValueError("not a trajectory: demonstration kind is discrete")
    samples = sorted(demo.samples, key=lambda p: p.stamp)
    tm = model.translation
    param = trajectory_parameter(model)

    rows = []
    for p in samples:
        coords = translation_coords(tm, p.translation)
        coords.update(rotation_coords(model.rotation, p.rotation))
        rows.append((p.stamp, coords, project_translation(tm, p.translation)))
    # unwrap angle coordinates over time so winding stays monotone
    for key in ("angle",):
        if rows and key in rows[0][1]:
            unwrapped = np.unwrap(np.array([r[1][key] for r in rows]))
            for r, val in zip(rows, unwrapped):
                r[1][key] = float(val)

    waypoints = []
    arc = 0.0
    prev_pos = None
    for stamp, coords, pos in rows:
        if prev_pos is not None:
            arc += float(np.linalg.norm(pos - prev_pos))
        prev_pos = pos
        primary = arc if param == "s" else coords[param]
        wp = Waypoint(stamp, float(primary), arc, tuple(sorted(coords.items())))
        if waypoints and abs(wp.primary - waypoints[-1].primary) <= 1e-12 \
                and abs(wp.arc_length - waypoints[-1].arc_length) <= 1e-12:
            continue  # collapse stationary stretches
        waypoints.append(wp)
    return Trajectory(param, tuple(waypoints))
