import math

import numpy as np
import pytest

from skillspace.constraints import (ConstraintCandidate, GeometricConstraint,
                                    MatchTolerance, Relation, Scene,
                                    SceneObject, ShapeRef,
                                    assemble_constraints, constraint_nullspace,
                                    derive_nullspace, line_line_distance,
                                    map_to_constraints)
from skillspace.geometry import (Circle, Cylinder, Line, Plane, Point, Pose,
                                 Rotation)
from skillspace.manifolds import (CircleManifold, CylinderManifold,
                                  ExtentBounds, Full3Space, FullSO3,
                                  LineManifold, NullspaceModel, OneAngle,
                                  OneParallel, PlaneManifold, PointManifold)


def rig_scene():
    """One fixed object with every shape kind, one constrained object."""
    fixture = SceneObject("fixture", Pose.identity(), (
        Point([0.1, 0.0, 0.2], name="anchor"),
        Line([0.0, 0.0, 0.1], [0, 0, 1], name="post"),
        Plane([0.0, 0.0, 0.0], [0, 0, 1], name="deck"),
        Circle([0.05, 0.0, 0.1], [0, 0, 1], 0.04, name="ring"),
        Cylinder([0.0, 0.0, 0.1], [0, 0, 1], 0.03, 0.2, name="drum"),
    ))
    tool = SceneObject("tool", Pose.identity(), (
        Point([0, 0, 0], name="tip"),
        Line([0, 0, 0], [0, 0, 1], name="shaft"),
        Plane([0, 0, 0], [0, 0, 1], name="face"),
        Cylinder([0.025, 0, 0], [0, 0, 1], 0.025, 0.1, name="sleeve"),
    ))
    return Scene((fixture, tool))


def C(fixed, constrained, relation, value=None, interval=None):
    return GeometricConstraint(ShapeRef.parse(fixed), ShapeRef.parse(constrained),
                               relation, value, interval)


class TestConstraintNullspace:
    def test_plane_plane_coincident(self):
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/deck", "tool/face",
                                   Relation.COINCIDENT), scene)
        assert isinstance(n.translation, PlaneManifold)
        assert abs(float(n.translation.p @ n.translation.n)) <= 1e-12
        assert isinstance(n.rotation, OneParallel)
        assert np.allclose(n.rotation.v_f, [0, 0, 1])

    def test_line_line_distance_gives_cylinder(self):
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/post", "tool/shaft",
                                   Relation.DISTANCE, value=0.05), scene)
        assert isinstance(n.translation, CylinderManifold)
        assert n.translation.r == pytest.approx(0.05)
        assert isinstance(n.rotation, OneParallel)

    def test_plane_plane_parallel_gives_free_translation(self):
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/deck", "tool/face",
                                   Relation.PARALLEL), scene)
        assert isinstance(n.translation, Full3Space)
        assert isinstance(n.rotation, OneParallel)

    def test_concentric_offset_cylinder(self):
        # constrained sleeve axis sits 0.025 from the tool origin, so the
        # origin rides a cylinder of that radius around the fixed axis
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/drum", "tool/sleeve",
                                   Relation.CONCENTRIC), scene)
        assert isinstance(n.translation, CylinderManifold)
        assert n.translation.r == pytest.approx(0.025)

    def test_point_point_coincident(self):
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/anchor", "tool/tip",
                                   Relation.COINCIDENT), scene)
        assert isinstance(n.translation, PointManifold)
        assert np.allclose(n.translation.p, [0.1, 0.0, 0.2])
        assert isinstance(n.rotation, FullSO3)

    def test_circle_point(self):
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/ring", "tool/tip",
                                   Relation.COINCIDENT), scene)
        assert isinstance(n.translation, CircleManifold)
        assert n.translation.r == pytest.approx(0.04)

    def test_plane_point_distance_signed(self):
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/deck", "tool/tip",
                                   Relation.DISTANCE, value=-0.07), scene)
        assert isinstance(n.translation, PlaneManifold)
        assert float(n.translation.p @ n.translation.n) == pytest.approx(-0.07)

    def test_plane_line_distance(self):
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/deck", "tool/shaft",
                                   Relation.DISTANCE, value=0.12), scene)
        assert isinstance(n.translation, PlaneManifold)
        assert isinstance(n.rotation, OneAngle)
        assert n.rotation.theta == pytest.approx(math.pi / 2)

    def test_angle_interval(self):
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/post", "tool/shaft",
                                   Relation.ANGLE, interval=(0.0, 1.2)), scene)
        assert isinstance(n.translation, Full3Space)
        assert isinstance(n.rotation, OneAngle)
        assert n.rotation.interval == (0.0, 1.2)

    def test_angle_zero_degenerates_to_parallel(self):
        scene = rig_scene()
        n = constraint_nullspace(C("fixture/post", "tool/shaft",
                                   Relation.ANGLE, value=0.0), scene)
        assert isinstance(n.rotation, OneParallel)

    def test_unsupported_pair(self):
        scene = rig_scene()
        with pytest.raises(ValueError, match="no Table I row"):
            constraint_nullspace(C("fixture/anchor", "tool/shaft",
                                   Relation.DISTANCE, value=0.1), scene)

    def test_interval_distance_rejected_alone(self):
        scene = rig_scene()
        with pytest.raises(ValueError, match="no Table I row"):
            constraint_nullspace(C("fixture/deck", "tool/face",
                                   Relation.DISTANCE, interval=(-0.1, 0.1)),
                                 scene)

    def test_offcenter_constrained_point_rejected(self):
        scene = Scene((
            SceneObject("fix", Pose.identity(),
                        (Point([0, 0, 0], name="anchor"),)),
            SceneObject("bad", Pose.identity(),
                        (Point([0.05, 0, 0], name="tip"),)),
        ))
        with pytest.raises(ValueError, match="origin"):
            constraint_nullspace(C("fix/anchor", "bad/tip",
                                   Relation.COINCIDENT), scene)


# every supported table row as (constraint, expected manifold types)
TABLE_ROWS = [
    ("fixture/post", "tool/tip", Relation.DISTANCE, 0.05, None,
     CylinderManifold, FullSO3),
    ("fixture/post", "tool/shaft", Relation.DISTANCE, 0.05, None,
     CylinderManifold, OneParallel),
    ("fixture/post", "tool/shaft", Relation.ANGLE, 0.7, None,
     Full3Space, OneAngle),
    ("fixture/deck", "tool/tip", Relation.DISTANCE, 0.08, None,
     PlaneManifold, FullSO3),
    ("fixture/deck", "tool/shaft", Relation.DISTANCE, 0.08, None,
     PlaneManifold, OneAngle),
    ("fixture/deck", "tool/shaft", Relation.ANGLE, 0.7, None,
     Full3Space, OneAngle),
    ("fixture/deck", "tool/face", Relation.DISTANCE, 0.08, None,
     PlaneManifold, OneParallel),
    ("fixture/deck", "tool/face", Relation.ANGLE, 0.7, None,
     Full3Space, OneAngle),
    ("fixture/anchor", "tool/tip", Relation.COINCIDENT, None, None,
     PointManifold, FullSO3),
    ("fixture/ring", "tool/tip", Relation.COINCIDENT, None, None,
     CircleManifold, FullSO3),
    ("fixture/drum", "tool/sleeve", Relation.CONCENTRIC, None, None,
     CylinderManifold, OneParallel),
]


class TestRoundTrip:
    @pytest.mark.parametrize("fixed,constrained,rel,value,interval,t_type,r_type",
                             TABLE_ROWS)
    def test_row_round_trip(self, fixed, constrained, rel, value, interval,
                            t_type, r_type):
        scene = rig_scene()
        c = C(fixed, constrained, rel, value, interval)
        n = constraint_nullspace(c, scene)
        assert isinstance(n.translation, t_type)
        assert isinstance(n.rotation, r_type)
        cands = map_to_constraints(n, scene, fixed="fixture", constrained="tool")
        found = [k.constraint for k in cands]

        def equivalent(a, b):
            if (a.fixed, a.constrained) != (b.fixed, b.constrained):
                return False
            if a.relation != b.relation:
                return False
            if a.value is not None:
                return b.value is not None and abs(a.value - b.value) <= 1e-6
            if a.interval is not None:
                return b.interval is not None and \
                    np.allclose(a.interval, b.interval, atol=1e-6)
            return True

        assert any(equivalent(c, got) for got in found), \
            f"{c.describe()} missing from {[g.describe() for g in found]}"

    def test_no_match_returns_empty(self):
        scene = rig_scene()
        model = NullspaceModel(PointManifold([5.0, 5.0, 5.0]), FullSO3())
        assert map_to_constraints(model, scene) == []


class TestDeriveNullspace:
    def test_interval_distance_becomes_axial_bounds(self):
        scene = rig_scene()
        constraints = [
            C("fixture/drum", "tool/sleeve", Relation.CONCENTRIC),
            C("fixture/deck", "tool/face", Relation.DISTANCE,
              interval=(0.05, 0.15)),
        ]
        n = derive_nullspace(constraints, scene)
        assert isinstance(n.translation, CylinderManifold)
        lo, hi = n.translation.bounds.get("axial")
        # the drum anchor sits at z=0.1, so deck offsets [0.05, 0.15]
        # correspond to axial coordinates [-0.05, 0.05]
        assert (lo, hi) == pytest.approx((-0.05, 0.05))

    def test_params_override_radius(self):
        scene = rig_scene()
        constraints = [C("fixture/drum", "tool/sleeve", Relation.CONCENTRIC)]
        n = derive_nullspace(constraints, scene, {"radius": 0.07})
        assert n.translation.r == pytest.approx(0.07)


class TestValidation:
    def test_valueless_relations_reject_values(self):
        with pytest.raises(ValueError):
            C("a/b", "c/d", Relation.COINCIDENT, value=0.1)

    def test_valued_relations_require_value(self):
        with pytest.raises(ValueError):
            C("a/b", "c/d", Relation.DISTANCE)

    def test_value_and_interval_exclusive(self):
        with pytest.raises(ValueError):
            C("a/b", "c/d", Relation.DISTANCE, value=0.1, interval=(0, 1))

    def test_shape_ref_parse(self):
        ref = ShapeRef.parse("cup/axis")
        assert ref.obj == "cup" and ref.shape == "axis"
        with pytest.raises(ValueError):
            ShapeRef.parse("nope")

    def test_scene_unique_names(self):
        with pytest.raises(ValueError):
            Scene((SceneObject("a", Pose.identity(), ()),
                   SceneObject("a", Pose.identity(), ())))

    def test_missing_lookup(self):
        scene = rig_scene()
        with pytest.raises(KeyError):
            scene.object("ghost")
        with pytest.raises(KeyError):
            scene.resolve(ShapeRef("fixture", "ghost"))


def test_line_line_distance():
    assert line_line_distance([0, 0, 0], [1, 0, 0],
                              [0, 0, 1], [1, 0, 0]) == pytest.approx(1.0)
    assert line_line_distance([0, 0, 0], [1, 0, 0],
                              [0, 0, 2], [0, 1, 0]) == pytest.approx(2.0)
    assert line_line_distance([0, 0, 0], [1, 0, 0],
                              [5, 0, 0], [1, 0, 0]) == pytest.approx(0.0)


def test_world_shape_transforms():
    scene = Scene((SceneObject(
        "obj", Pose(np.array([1.0, 0, 0]),
                    Rotation.from_axis_angle([0, 0, 1], math.pi / 2)),
        (Line([0, 0, 0], [1, 0, 0], name="l"),)),))
    w = scene.world_shape(ShapeRef("obj", "l"))
    assert np.allclose(w.p, [1, 0, 0])
    assert np.allclose(w.a, [0, 1, 0], atol=1e-12)
