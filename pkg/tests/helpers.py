"""Shared builders for randomized geometry/manifold tests."""

from __future__ import annotations

import numpy as np

from skillspace.geometry import Pose, Rotation
from skillspace.manifolds import (CircleManifold, CylinderManifold,
                                  ExtentBounds, Full3Space, FullSO3,
                                  LineManifold, OneAngle, OneParallel,
                                  PlaneManifold, PointManifold, SampleSpec)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    return Rotation.from_quat(q)


def random_pose(rng, scale=1.0):
    return Pose(rng.uniform(-scale, scale, size=3), random_rotation(rng))


def translation_manifold_zoo(rng):
    """One randomized instance of every translation manifold type."""
    p = rng.uniform(-0.5, 0.5, size=3)
    a = random_unit(rng)
    n = random_unit(rng)
    r = rng.uniform(0.02, 0.4)
    return [
        Full3Space(),
        PointManifold(p),
        LineManifold(p, a),
        CircleManifold(p, n, r),
        PlaneManifold(p, n),
        CylinderManifold(p, a, r),
    ]


def rotation_manifold_zoo(rng):
    v = random_unit(rng)
    theta = rng.uniform(0.1, np.pi - 0.1)
    lo = rng.uniform(0.0, 1.0)
    hi = lo + rng.uniform(0.1, 1.0)
    return [
        FullSO3(),
        OneParallel(v),
        OneAngle(v, theta),
        OneAngle(v, theta=min(hi, np.pi), interval=(lo, min(hi, np.pi))),
    ]


def bounded_copy(m, rng):
    """Attach sampling bounds to every non-compact free dimension."""
    from dataclasses import replace

    from skillspace.manifolds import free_dims

    bounds = ExtentBounds()
    for name, compact in free_dims(m):
        if not compact:
            lo = rng.uniform(-0.3, 0.0)
            bounds = bounds.with_interval(name, lo, lo + rng.uniform(0.05, 0.5))
    return replace(m, bounds=bounds)


DEFAULT_SPEC = SampleSpec.of(x=(-0.3, 0.3), y=(-0.3, 0.3), z=(-0.3, 0.3),
                             t=(-0.3, 0.3), u=(-0.3, 0.3), v=(-0.3, 0.3),
                             axial=(-0.3, 0.3))
