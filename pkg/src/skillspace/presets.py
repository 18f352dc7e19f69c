"""Ready-made scene and robot used by the examples, tests, and CLI docs.

The scene follows the conventions the skill templates expect: every object
frame sits at its functional reference point (cup at the bottom center,
bottle at the mouth, spoon at the tip, gripper at the palm contact point) and
all shape directions are +z in their object frame.
"""

from __future__ import annotations

import math

import numpy as np

from .constraints import Scene, SceneObject
from .geometry import Circle, Cylinder, Line, Plane, Point, Pose, Rotation
from .solver import JointSpec, KinematicChain

CUP_RADIUS = 0.035
CUP_HEIGHT = 0.10


def default_scene(cup_at=(0.45, 0.10, 0.0), bottle_at=(0.30, -0.15, 0.0)) -> Scene:
    # the table frame sits in front of the robot so that manifolds anchored
    # at table shapes (place plane, move box) stay inside the arm's reach
    table = SceneObject("table", Pose.from_translation([0.45, 0.0, 0.0]), (
        Plane([0, 0, 0], [0, 0, 1], name="surface"),
        Line([-0.10, 0.10, 0], [1, 0, 0], name="pull-line"),
    ))
    half = CUP_HEIGHT / 2.0
    cup = SceneObject("cup", Pose.from_translation(cup_at), (
        Cylinder([0, 0, half], [0, 0, 1], CUP_RADIUS, CUP_HEIGHT, name="body"),
        Line([0, 0, half], [0, 0, 1], name="axis"),
        Plane([0, 0, half], [0, 0, 1], name="midplane"),
        Plane([0, 0, 0], [0, 0, 1], name="bottom"),
        Circle([0, 0, CUP_HEIGHT], [0, 0, 1], CUP_RADIUS, name="rim"),
        Circle([0, 0, 0.03], [0, 0, 1], 0.02, name="stir-circle"),
        Point([0, 0, CUP_HEIGHT + 0.05], name="pour-point"),
    ))
    bottle = SceneObject("bottle", Pose.from_translation(bottle_at), (
        Point([0, 0, 0], name="mouth"),
        Line([0, 0, 0], [0, 0, 1], name="axis"),
    ))
    gripper = SceneObject("gripper", Pose.identity(), (
        Point([0, 0, 0], name="center"),
        Line([0, 0, 0], [0, 0, 1], name="axis"),
        Plane([0, 0, 0], [0, 0, 1], name="palm"),
        Cylinder([CUP_RADIUS, 0, 0], [0, 0, 1], CUP_RADIUS, CUP_HEIGHT,
                 name="grip"),
    ))
    spoon = SceneObject("spoon", Pose.identity(), (
        Point([0, 0, 0], name="tip"),
        Line([0, 0, 0], [0, 0, 1], name="tool-axis"),
    ))
    return Scene((table, cup, bottle, gripper, spoon))


def default_chain() -> KinematicChain:
    """Articulated 6R arm, roughly elbow-type, ~0.85 m reach.

    The tool frame is flipped 180 degrees about x so that an upright object
    held by the gripper (+z up) corresponds to the natural flange-down
    posture of the arm.
    """
    joints = (
        JointSpec(a=0.0, alpha=math.pi / 2, d=0.35, theta0=0.0,
                  q_lo=-2.967, q_hi=2.967),
        JointSpec(a=0.40, alpha=0.0, d=0.0, theta0=0.0,
                  q_lo=-2.3, q_hi=2.3),
        JointSpec(a=0.05, alpha=math.pi / 2, d=0.0, theta0=0.0,
                  q_lo=-2.6, q_hi=2.6),
        JointSpec(a=0.0, alpha=-math.pi / 2, d=0.35, theta0=0.0,
                  q_lo=-3.0, q_hi=3.0),
        JointSpec(a=0.0, alpha=math.pi / 2, d=0.0, theta0=0.0,
                  q_lo=-2.2, q_hi=2.2),
        JointSpec(a=0.0, alpha=0.0, d=0.10, theta0=0.0,
                  q_lo=-3.0, q_hi=3.0),
    )
    tool = Pose(np.zeros(3), Rotation.from_axis_angle([1.0, 0.0, 0.0], math.pi))
    return KinematicChain(joints, tool=tool)
