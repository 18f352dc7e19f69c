import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_pose
from skillspace.geometry import (Circle, Cylinder, Line, Plane, Point, Pose,
                                 Rotation, compose, perpendicular_to,
                                 relative_pose, rotation_from_axis_angle)


def T(x, y, z):
    return Pose(np.array([x, y, z], dtype=float))


class TestCompose:
    def test_identity_left(self):
        rng = np.random.default_rng(1)
        p = random_pose(rng)
        assert compose(Pose.identity(), p).is_close(p, 1e-15)

    def test_inverse_cancels(self):
        rng = np.random.default_rng(2)
        p = random_pose(rng)
        assert compose(p, p.inverse()).is_close(Pose.identity(), 1e-12)

    def test_pure_translations_add(self):
        c = compose(T(1, 0, 0), T(0, 1, 0))
        assert np.allclose(c.translation, [1, 1, 0])
        assert c.rotation.is_close(Rotation.identity(), 1e-15)

    def test_associative(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            a, b, c = (random_pose(rng) for _ in range(3))
            left = compose(compose(a, b), c)
            right = compose(a, compose(b, c))
            assert left.is_close(right, 1e-12)


class TestRelativePose:
    def test_same_frame_is_identity(self):
        rng = np.random.default_rng(4)
        p = random_pose(rng)
        assert relative_pose(p, p).is_close(Pose.identity(), 1e-12)

    def test_identity_fixed(self):
        rng = np.random.default_rng(5)
        p = random_pose(rng)
        assert relative_pose(Pose.identity(), p).is_close(p, 1e-15)

    def test_pure_translation_difference(self):
        rel = relative_pose(T(0, 0, 1), T(0, 0, 3))
        assert np.allclose(rel.translation, [0, 0, 2])

    def test_round_trip(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            f, d = random_pose(rng), random_pose(rng)
            assert relative_pose(f, compose(f, d)).is_close(d, 1e-12)


class TestAxisAngle:
    def test_zero_angle_is_identity(self):
        r = rotation_from_axis_angle([0, 0, 1], 0.0)
        assert r.is_close(Rotation.identity(), 1e-15)

    def test_pi_about_z(self):
        r = rotation_from_axis_angle([0, 0, 1], math.pi)
        assert np.allclose(r.apply([1, 0, 0]), [-1, 0, 0], atol=1e-12)

    def test_quarter_about_x(self):
        r = rotation_from_axis_angle([1, 0, 0], math.pi / 2)
        assert np.allclose(r.apply([0, 1, 0]), [0, 0, 1], atol=1e-12)

    def test_rejects_non_unit_axis(self):
        with pytest.raises(ValueError):
            rotation_from_axis_angle([0, 0, 2], 0.3)

    def test_opposite_angles_cancel(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = rng.normal(size=3)
            a /= np.linalg.norm(a)
            th = rng.uniform(-math.pi, math.pi)
            r = rotation_from_axis_angle(a, th) * rotation_from_axis_angle(a, -th)
            assert r.is_close(Rotation.identity(), 1e-12)


class TestRotation:
    def test_canonical_sign(self):
        r = Rotation(-1.0, 0.0, 0.0, 0.0)
        assert r.quat[0] == 1.0

    @given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
    @settings(max_examples=200)
    def test_canonicalization_idempotent(self, q):
        q = np.asarray(q)
        if np.linalg.norm(q) < 1e-3:
            return
        q = q / np.linalg.norm(q)
        once = Rotation.from_quat(q)
        twice = Rotation.from_quat(once.quat)
        assert np.array_equal(once.quat, twice.quat)

    def test_matrix_round_trip(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            q = rng.normal(size=4)
            r = Rotation.from_quat(q / np.linalg.norm(q))
            back = Rotation.from_matrix(r.as_matrix())
            assert r.is_close(back, 1e-12)

    def test_apply_matches_matrix(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            q = rng.normal(size=4)
            r = Rotation.from_quat(q / np.linalg.norm(q))
            v = rng.normal(size=3)
            assert np.allclose(r.apply(v), r.as_matrix() @ v, atol=1e-12)

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            Rotation(1.0, 1.0, 0.0, 0.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Rotation(float("nan"), 0.0, 0.0, 0.0)


class TestShapes:
    def test_positive_radius_enforced(self):
        with pytest.raises(ValueError):
            Circle([0, 0, 0], [0, 0, 1], r=-0.1)
        with pytest.raises(ValueError):
            Cylinder([0, 0, 0], [0, 0, 1], r=0.0, h=0.1)
        with pytest.raises(ValueError):
            Cylinder([0, 0, 0], [0, 0, 1], r=0.1, h=-1.0)

    def test_directions_normalized(self):
        with pytest.raises(ValueError):
            Line([0, 0, 0], [0, 0, 3])
        assert np.allclose(Plane([0, 0, 0], [0, 0, 1 + 1e-9]).n, [0, 0, 1])

    def test_transform_preserves_structure(self):
        rng = np.random.default_rng(10)
        pose = random_pose(rng)
        cyl = Cylinder([0.1, 0, 0], [0, 0, 1], r=0.05, h=0.2, name="body")
        moved = cyl.transform(pose)
        assert moved.r == cyl.r and moved.h == cyl.h and moved.name == "body"
        assert np.allclose(moved.p, pose.apply(cyl.p))
        assert np.allclose(moved.a, pose.rotation.apply(cyl.a))

    def test_point_transform(self):
        p = Point([1, 2, 3]).transform(T(0, 0, 1))
        assert np.allclose(p.p, [1, 2, 4])


def test_perpendicular_fallback_deterministic():
    for axis in ([0, 0, 1], [1, 0, 0], [0, 1, 0], [0.6, 0.48, 0.64]):
        v = perpendicular_to(axis)
        w = perpendicular_to(axis)
        assert np.array_equal(v, w)
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        assert abs(v @ np.asarray(axis, dtype=float) / np.linalg.norm(axis)) < 1e-9
