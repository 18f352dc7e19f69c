import math

import numpy as np
import pytest

from helpers import (DEFAULT_SPEC, bounded_copy, random_rotation, random_unit,
                     rotation_manifold_zoo, translation_manifold_zoo)
from skillspace.geometry import Rotation, angle_between, perpendicular_to
from skillspace.manifolds import (CircleManifold, CylinderManifold,
                                  ExtentBounds, Full3Space, FullSO3,
                                  LineManifold, NullspaceModel, OneAngle,
                                  OneParallel, PlaneManifold, PointManifold,
                                  SampleSpec, constrained_axis, dist_r, dist_t,
                                  dist_t_many, nullspace_distances,
                                  project_rotation, project_translation,
                                  quat_distance, rotation_residual_vec,
                                  sample_pose, translation_coords,
                                  translation_point)


def surface_point(m, coords_rng):
    """Random point on a manifold, via its coordinate chart."""
    from skillspace.manifolds import free_dims
    coords = {}
    for name, compact in free_dims(m):
        coords[name] = coords_rng.uniform(0, 2 * np.pi) if compact else coords_rng.uniform(-0.5, 0.5)
    return translation_point(m, coords)


# ---------------------------------------------------------------------------
# Translation projection
# ---------------------------------------------------------------------------

class TestProjectTranslation:
    def test_plane_drops_normal_component(self):
        m = PlaneManifold([0, 0, 0], [0, 0, 1])
        assert np.allclose(project_translation(m, [1, 2, 3]), [1, 2, 0])

    def test_circle_hand_example(self):
        m = CircleManifold([0, 0, 0], [0, 0, 1], r=1.0)
        assert np.allclose(project_translation(m, [2, 0, 5]), [1, 0, 0], atol=1e-12)

    def test_cylinder_hand_example(self):
        m = CylinderManifold([0, 0, 0], [0, 0, 1], r=1.0)
        assert np.allclose(project_translation(m, [2, 0, 3]), [1, 0, 3], atol=1e-12)

    def test_cylinder_matches_numeric_nearest_point_oracle(self):
        # independent oracle: minimize ||x(theta, t) - u|| over the
        # parameterized surface, coarse grid + local polish
        from scipy.optimize import minimize

        rng = np.random.default_rng(11)
        for _ in range(20):
            p = rng.uniform(-0.5, 0.5, size=3)
            a = random_unit(rng)
            r = rng.uniform(0.05, 0.5)
            m = CylinderManifold(p, a, r)
            e1 = perpendicular_to(a)
            e2 = np.cross(a, e1)
            u = rng.uniform(-1, 1, size=3)

            def spoint(theta, t):
                return p + t * a + r * (math.cos(theta) * e1 + math.sin(theta) * e2)

            best = None
            for theta in np.linspace(0, 2 * np.pi, 73):
                for t in np.linspace(-3, 3, 61):
                    d = np.linalg.norm(spoint(theta, t) - u)
                    if best is None or d < best[0]:
                        best = (d, theta, t)
            res = minimize(lambda x: np.linalg.norm(spoint(x[0], x[1]) - u),
                           [best[1], best[2]], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-14})
            oracle = spoint(res.x[0], res.x[1])
            assert np.allclose(project_translation(m, u), oracle, atol=1e-6)

    def test_degenerate_on_axis_is_deterministic(self):
        m = CylinderManifold([0, 0, 0], [0, 0, 1], r=1.0)
        a = project_translation(m, [0, 0, 0.3])
        b = project_translation(m, [0, 0, 0.3])
        assert np.array_equal(a, b)
        assert abs(np.linalg.norm(a[:2]) - 1.0) < 1e-12
        c = CircleManifold([0, 0, 0], [0, 0, 1], r=0.5)
        assert np.allclose(np.linalg.norm(project_translation(c, [0, 0, 2])), 0.5)

    def test_idempotent_all_variants(self):
        rng = np.random.default_rng(12)
        for m in translation_manifold_zoo(rng):
            for _ in range(200):
                u = rng.uniform(-1, 1, size=3)
                once = project_translation(m, u)
                twice = project_translation(m, once)
                assert np.linalg.norm(once - twice) <= 1e-9

    def test_optimality_all_variants(self):
        rng = np.random.default_rng(13)
        coords_rng = np.random.default_rng(14)
        for m in translation_manifold_zoo(rng):
            for _ in range(100):
                u = rng.uniform(-1, 1, size=3)
                proj = project_translation(m, u)
                d = np.linalg.norm(proj - u)
                for _ in range(10):
                    x = surface_point(m, coords_rng)
                    assert d <= np.linalg.norm(x - u) + 1e-9

    def test_coords_round_trip(self):
        rng = np.random.default_rng(15)
        coords_rng = np.random.default_rng(16)
        for m in translation_manifold_zoo(rng):
            for _ in range(50):
                x = surface_point(m, coords_rng)
                back = translation_point(m, translation_coords(m, x))
                assert np.allclose(back, x, atol=1e-9)

    def test_bounded_projection_clamps(self):
        m = CylinderManifold([0, 0, 0], [0, 0, 1], r=0.1,
                             bounds=ExtentBounds.of(axial=(-0.05, 0.05)))
        proj = project_translation(m, [0.3, 0, 1.0], bounded=True)
        assert abs(proj[2] - 0.05) < 1e-12
        assert abs(np.linalg.norm(proj[:2]) - 0.1) < 1e-12
        # inside the bounds the clamp is a no-op
        p2 = project_translation(m, [0.3, 0, 0.01], bounded=True)
        assert np.allclose(p2, project_translation(m, [0.3, 0, 0.01]))

    def test_bounded_angle_clamp(self):
        m = CircleManifold([0, 0, 0], [0, 0, 1], r=1.0,
                           bounds=ExtentBounds.of(angle=(0.0, np.pi / 2)))
        proj = project_translation(m, [1, -0.2, 0], bounded=True)
        assert np.allclose(proj, [1, 0, 0], atol=1e-12)


class TestDistT:
    def test_plane_distance(self):
        assert dist_t(PlaneManifold([0, 0, 0], [0, 0, 1]), [0, 0, 2]) == pytest.approx(2.0)

    def test_line_distance(self):
        assert dist_t(LineManifold([0, 0, 0], [1, 0, 0]), [5, 3, 4]) == pytest.approx(5.0)

    def test_zero_on_projection(self):
        rng = np.random.default_rng(17)
        for m in translation_manifold_zoo(rng):
            u = rng.uniform(-1, 1, size=3)
            assert dist_t(m, project_translation(m, u)) <= 1e-9

    def test_many_matches_scalar(self):
        rng = np.random.default_rng(18)
        for m in translation_manifold_zoo(rng):
            U = rng.uniform(-1, 1, size=(40, 3))
            many = dist_t_many(m, U)
            one = np.array([dist_t(m, u) for u in U])
            assert np.allclose(many, one, atol=1e-12)


# ---------------------------------------------------------------------------
# Rotation projection
# ---------------------------------------------------------------------------

class TestProjectRotation:
    def test_full_so3_is_identity_map(self):
        rng = np.random.default_rng(19)
        r = random_rotation(rng)
        assert project_rotation(FullSO3(), r) is r
        assert dist_r(FullSO3(), r) == 0.0

    def test_one_parallel_already_satisfied(self):
        m = OneParallel([0, 0, 1])
        assert project_rotation(m, Rotation.identity()).is_close(Rotation.identity())

    def test_one_parallel_quarter_turn_projects_to_identity(self):
        # v_c = (0,-1,0); the correcting rotation -90deg about x cancels R_i
        m = OneParallel([0, 0, 1])
        r = Rotation.from_axis_angle([1, 0, 0], math.pi / 2)
        assert project_rotation(m, r).is_close(Rotation.identity(), 1e-12)

    def test_one_angle_from_identity_hits_target(self):
        m = OneAngle([0, 0, 1], theta=math.pi / 2)
        proj = project_rotation(m, Rotation.identity())
        v_c = constrained_axis(proj, "+z")
        assert abs(angle_between(v_c, [0, 0, 1]) - math.pi / 2) <= 1e-9

    def test_post_condition_random(self):
        rng = np.random.default_rng(20)
        for _ in range(300):
            v = random_unit(rng)
            r = random_rotation(rng)
            mp = OneParallel(v)
            vc = constrained_axis(project_rotation(mp, r), "+z")
            assert angle_between(vc, v) <= 1e-9
            th = rng.uniform(0.05, math.pi - 0.05)
            ma = OneAngle(v, th)
            vc = constrained_axis(project_rotation(ma, r), "+z")
            assert abs(angle_between(vc, v) - th) <= 1e-9

    def test_interval_post_condition(self):
        rng = np.random.default_rng(21)
        m = OneAngle([0, 0, 1], theta=0.5, interval=(0.3, 0.8))
        for _ in range(200):
            r = random_rotation(rng)
            ang = angle_between(constrained_axis(project_rotation(m, r), "+z"), [0, 0, 1])
            assert 0.3 - 1e-9 <= ang <= 0.8 + 1e-9
        # inside the interval nothing moves
        r_in = Rotation.from_axis_angle([1, 0, 0], 0.5)
        assert project_rotation(m, r_in).is_close(r_in, 1e-15)

    def test_projection_minimality(self):
        # the correction never rotates farther than any other rotation that
        # satisfies the manifold, sampled crudely
        rng = np.random.default_rng(22)
        m = OneParallel([0, 0, 1])
        for _ in range(50):
            r = random_rotation(rng)
            proj = project_rotation(m, r)
            d = quat_distance(proj, r)
            for _ in range(20):
                spin = Rotation.from_axis_angle([0, 0, 1], rng.uniform(0, 2 * np.pi))
                other = spin * proj
                assert d <= quat_distance(other, r) + 1e-9


class TestDistR:
    def test_one_parallel_satisfied_zero(self):
        m = OneParallel([0, 0, 1])
        r = Rotation.from_axis_angle([0, 0, 1], 1.234)
        assert dist_r(m, r) <= 1e-9

    def test_hand_computed_quarter_turn(self):
        m = OneParallel([0, 0, 1])
        r = Rotation.from_axis_angle([1, 0, 0], math.pi / 2)
        expected = math.sqrt((1 - math.cos(math.pi / 4)) ** 2 + math.sin(math.pi / 4) ** 2)
        assert dist_r(m, r) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.7654, abs=1e-4)

    def test_sign_flip_invariance(self):
        rng = np.random.default_rng(23)
        for m in rotation_manifold_zoo(rng):
            for _ in range(50):
                r = random_rotation(rng)
                flipped = Rotation.from_quat(-r.quat)
                assert dist_r(m, r) == pytest.approx(dist_r(m, flipped), abs=1e-12)

    def test_zero_iff_membership(self):
        rng = np.random.default_rng(24)
        for m in rotation_manifold_zoo(rng):
            for _ in range(50):
                r = random_rotation(rng)
                proj = project_rotation(m, r)
                assert dist_r(m, proj) <= 1e-9

    def test_residual_vec_norm_matches(self):
        rng = np.random.default_rng(25)
        for m in rotation_manifold_zoo(rng):
            r = random_rotation(rng)
            assert np.linalg.norm(rotation_residual_vec(m, r)) == pytest.approx(
                dist_r(m, r), abs=1e-12)


class TestConstrainedAxis:
    def test_identity_z(self):
        assert np.allclose(constrained_axis(Rotation.identity(), "+z"), [0, 0, 1])

    def test_quarter_about_x(self):
        r = Rotation.from_axis_angle([1, 0, 0], math.pi / 2)
        assert np.allclose(constrained_axis(r, "+z"), [0, -1, 0], atol=1e-12)

    def test_negation(self):
        rng = np.random.default_rng(26)
        r = random_rotation(rng)
        assert np.allclose(constrained_axis(r, "-z"), -constrained_axis(r, "+z"))

    def test_unknown_selector(self):
        with pytest.raises(ValueError):
            constrained_axis(Rotation.identity(), "+w")


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

class TestSamplePose:
    def test_cylinder_with_axial_bounds(self):
        m = CylinderManifold([0, 0, 0], [0, 0, 1], r=0.05,
                             bounds=ExtentBounds.of(axial=(-0.05, 0.05)))
        model = NullspaceModel(m, OneParallel([0, 0, 1]))
        for seed in range(20):
            pose = sample_pose(model, seed=seed)
            assert dist_t(m, pose.translation) <= 1e-9
            assert -0.05 <= pose.translation[2] <= 0.05
            assert dist_r(model.rotation, pose.rotation) <= 1e-9

    def test_point_manifold_exact(self):
        model = NullspaceModel(PointManifold([0.1, 0.2, 0.3]), FullSO3())
        pose = sample_pose(model, seed=7)
        assert np.array_equal(pose.translation, [0.1, 0.2, 0.3])

    def test_deterministic(self):
        model = NullspaceModel(PlaneManifold([0, 0, 0.1], [0, 0, 1]),
                               OneParallel([0, 0, 1]))
        spec = SampleSpec.of(u=(-0.2, 0.2), v=(-0.2, 0.2))
        a = sample_pose(model, spec, seed=99)
        b = sample_pose(model, spec, seed=99)
        assert np.array_equal(a.translation, b.translation)
        assert np.array_equal(a.rotation.quat, b.rotation.quat)

    def test_unbounded_raises(self):
        model = NullspaceModel(LineManifold([0, 0, 0], [1, 0, 0]), FullSO3())
        with pytest.raises(ValueError, match="unbounded sample domain"):
            sample_pose(model, seed=0)

    def test_every_sample_on_manifold(self):
        rng = np.random.default_rng(27)
        mrng = np.random.default_rng(28)
        for tm in translation_manifold_zoo(mrng):
            tm = bounded_copy(tm, mrng)
            for rm in rotation_manifold_zoo(mrng):
                model = NullspaceModel(tm, rm)
                pose = sample_pose(model, DEFAULT_SPEC, seed=int(rng.integers(1 << 30)))
                dt, dr = nullspace_distances(model, pose)
                assert dt <= 1e-9
                assert dr <= 1e-9

    def test_one_angle_interval_sampling(self):
        model = NullspaceModel(PointManifold([0, 0, 0]),
                               OneAngle([0, 0, 1], 0.6, interval=(0.0, 1.2)))
        angles = []
        for seed in range(50):
            pose = sample_pose(model, seed=seed)
            angles.append(angle_between(constrained_axis(pose.rotation, "+z"), [0, 0, 1]))
        angles = np.array(angles)
        assert np.all(angles >= -1e-9) and np.all(angles <= 1.2 + 1e-9)
        assert angles.std() > 0.1  # actually spreads over the interval


def test_extent_bounds_validation():
    with pytest.raises(ValueError):
        ExtentBounds.of(axial=(0.2, -0.2))
    b = ExtentBounds.of(axial=(-1, 1)).with_interval("angle", 0, 1)
    assert b.get("angle") == (0.0, 1.0)
    assert set(b.names()) == {"axial", "angle"}


def test_one_angle_validation():
    with pytest.raises(ValueError):
        OneAngle([0, 0, 1], theta=4.0)
    with pytest.raises(ValueError):
        OneAngle([0, 0, 1], theta=1.0, interval=(1.5, 0.5))
