"""Infer geometric skill nullspaces from pose demonstrations and execute them."""

from .geometry import (Circle, Cylinder, Line, Plane, Point, Pose, Rotation,
                       Shape, compose, relative_pose, rotation_from_axis_angle)
from .manifolds import (CircleManifold, CylinderManifold, ExtentBounds,
                        Full3Space, FullSO3, LineManifold, NullspaceModel,
                        OneAngle, OneParallel, PlaneManifold, PointManifold,
                        SampleSpec, constrained_axis, dist_r, dist_t,
                        project_rotation, project_translation, sample_pose)

__all__ = [
    "Circle", "CircleManifold", "Cylinder", "CylinderManifold", "ExtentBounds",
    "Full3Space", "FullSO3", "Line", "LineManifold", "NullspaceModel",
    "OneAngle", "OneParallel", "Plane", "PlaneManifold", "Point",
    "PointManifold", "Pose", "Rotation", "SampleSpec", "Shape",
    "compose", "constrained_axis", "dist_r", "dist_t", "project_rotation",
    "project_translation", "relative_pose", "rotation_from_axis_angle",
    "sample_pose",
]

__version__ = "0.1.0"
