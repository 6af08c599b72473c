import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flexcrystal.geom3 import (AntipodalError, DegenerateCircleError, GeometryError,
                               OrientationError, Orthogonal3, UndefinedGeodesicError,
                               chord_midpoint_circle, exp_so3, geodesic_reflection,
                               minimal_rotation, reflection_across_plane, rotation_circle,
                               rotation_from_axis_angle)

from conftest import random_unit

E1, E2, E3 = np.eye(3)

finite = st.floats(-10, 10, allow_nan=False)
directions = st.tuples(finite, finite, finite).filter(
    lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: np.array(v) / np.linalg.norm(v))
angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


def assert_fresh(M: Orthogonal3, sign):
    assert M.det_sign == sign
    assert np.max(np.abs(M.matrix.T @ M.matrix - np.eye(3))) < 1e-12
    assert abs(np.linalg.det(M.matrix) - sign) < 1e-12


class TestOrthogonal3:
    def test_rejects_non_orthogonal(self):
        with pytest.raises(GeometryError):
            Orthogonal3(np.diag([1.0, 1.0, 1.1]))

    def test_declared_sign_must_match(self):
        with pytest.raises(OrientationError):
            Orthogonal3(np.diag([1.0, 1.0, -1.0]), 1)

    def test_negation_flips_sign_and_composition_multiplies(self):
        R = rotation_from_axis_angle(E3, 0.4)
        S = reflection_across_plane(E1)
        assert (-R).det_sign == -1
        assert (R @ S).det_sign == -1
        assert (S @ S).allclose(Orthogonal3.identity())
        assert np.allclose(R.T.matrix, np.linalg.inv(R.matrix))

    def test_matrix_is_read_only(self):
        R = Orthogonal3.identity()
        with pytest.raises(ValueError):
            R.matrix[0, 0] = 2.0


class TestRotationFromAxisAngle:
    def test_zero_angle_is_identity(self, rng):
        R = rotation_from_axis_angle(random_unit(rng), 0.0)
        assert R.allclose(Orthogonal3.identity())

    def test_quarter_turn(self):
        R = rotation_from_axis_angle(E3, np.pi / 2)
        assert np.allclose(R @ E1, E2, atol=1e-15)

    @given(directions, angles)
    def test_orthogonal_and_fixes_axis(self, axis, angle):
        R = rotation_from_axis_angle(axis, angle)
        assert_fresh(R, 1)
        assert np.allclose(R @ axis, axis, atol=1e-12)

    def test_non_unit_axis(self):
        with pytest.raises(GeometryError):
            rotation_from_axis_angle([0, 0, 2.0], 0.1)

    def test_exp_so3_matches_axis_angle(self):
        w = np.array([0.3, -0.2, 0.5])
        th = np.linalg.norm(w)
        assert exp_so3(w).allclose(rotation_from_axis_angle(w / th, th))
        assert exp_so3(np.zeros(3)).allclose(Orthogonal3.identity())


class TestMinimalRotation:
    def test_equal_inputs(self):
        assert minimal_rotation(E1, E1).allclose(Orthogonal3.identity())

    def test_e1_to_e2(self):
        assert minimal_rotation(E1, E2).allclose(rotation_from_axis_angle(E3, np.pi / 2))

    def test_antipodal(self):
        with pytest.raises(AntipodalError):
            minimal_rotation(E1, -E1)

    @given(directions, directions)
    def test_maps_a_to_b_about_cross_axis(self, a, b):
        if np.dot(a, b) < -1 + 1e-6:
            return
        R = minimal_rotation(a, b)
        assert_fresh(R, 1)
        assert np.allclose(R @ a, b, atol=1e-9)
        axis = np.cross(a, b)
        assert np.allclose(R @ axis, axis, atol=1e-9)


class TestReflection:
    def test_e3(self):
        assert np.array_equal(reflection_across_plane(E3).matrix, np.diag([1.0, 1.0, -1.0]))

    @given(directions)
    def test_involution(self, n):
        M = reflection_across_plane(n)
        assert_fresh(M, -1)
        assert (M @ M).allclose(Orthogonal3.identity())

    def test_fixes_plane(self):
        f1 = np.array([1.0, 0.0, 0.0])
        f2 = np.array([0.5, np.sqrt(3) / 2, 0.0])
        n = np.cross(f1, f2) / np.linalg.norm(np.cross(f1, f2))
        M = reflection_across_plane(n)
        assert np.allclose(M @ f1, f1, atol=1e-15)
        assert np.allclose(M @ f2, f2, atol=1e-15)


class TestRotationCircle:
    def test_identity_case(self):
        v = np.array([1.0, -1.0, 0.5])
        assert rotation_circle(v, v, 0.0).allclose(Orthogonal3.identity())

    def test_maps_v_to_w_for_all_phi(self, rng):
        for _ in range(200):
            v = rng.normal(size=3)
            w = random_unit(rng) * np.linalg.norm(v)
            if np.dot(v, w) < -0.99 * np.dot(v, v):
                continue
            R = rotation_circle(v, w, rng.uniform(0, 2 * np.pi))
            assert np.linalg.norm(R @ v - w) < 1e-12
            assert_fresh(R, 1)

    def test_completeness_by_angle_extraction(self, rng):
        # independent angle recovery: the residual map T M^-1 turns a vector
        # perpendicular to w by the chart angle
        for _ in range(100):
            v = random_unit(rng)
            w = random_unit(rng)
            if np.dot(v, w) < -0.99:
                continue
            psi = rng.uniform(0, 2 * np.pi)
            T = rotation_circle(v, w, psi)
            M = minimal_rotation(v, w)
            n = np.cross(w, random_unit(rng))
            n /= np.linalg.norm(n)
            tn = (T @ M.T) @ n
            psi_back = np.arctan2(np.dot(np.cross(n, tn), w), np.dot(n, tn)) % (2 * np.pi)
            assert abs(np.angle(np.exp(1j * (psi_back - psi)))) < 1e-9
            assert rotation_circle(v, w, psi_back).distance(T) < 1e-9

    def test_injective_in_phi(self):
        v, w = E1, E2
        a = rotation_circle(v, w, 0.3)
        b = rotation_circle(v, w, 0.3 + 1e-3)
        assert a.distance(b) > 1e-4

    def test_errors(self):
        with pytest.raises(AntipodalError):
            rotation_circle(E1, -E1, 0.0)
        with pytest.raises(GeometryError):
            rotation_circle(np.zeros(3), E1, 0.0)
        with pytest.raises(GeometryError):
            rotation_circle(E1, 2 * E2, 0.0)


class TestChordMidpointCircle:
    def test_point_circle(self):
        c = chord_midpoint_circle(E1, E1)
        assert c.degenerate
        assert c.contains(E1)

    def test_e1_e2(self):
        c = chord_midpoint_circle(E1, E2)
        assert np.allclose(c.m, (E1 + E2) / 2)
        for p in (E1, E2):
            assert abs(np.dot(p, c.m) - 0.5) < 1e-15
            assert c.contains(p)

    def test_antipodal(self):
        with pytest.raises(DegenerateCircleError):
            chord_midpoint_circle(E1, -E1)

    def test_parametrization_and_duality(self, rng):
        for _ in range(50):
            e = random_unit(rng)
            Q = rotation_from_axis_angle(random_unit(rng), rng.uniform(0.01, 2.5))
            c = chord_midpoint_circle(e, Q @ e)
            assert np.allclose(c.point(0.0), e, atol=1e-12)
            assert np.allclose(c.point(np.pi), Q @ e, atol=1e-12)
            for a in rng.uniform(0, 2 * np.pi, 10):
                p = c.point(a)
                assert c.contains(p, 1e-12)
                assert abs(np.linalg.norm(c.complement(p)) - 1.0) < 1e-12

    def test_off_circle_point_has_non_unit_complement(self):
        c = chord_midpoint_circle(E1, E2)
        assert abs(np.linalg.norm(c.complement(E3)) - 1.0) > 0.1

    def test_vectorised_point(self):
        c = chord_midpoint_circle(E1, E2)
        grid = np.linspace(0, 2 * np.pi, 12).reshape(3, 4)
        P = c.point(grid)
        assert P.shape == (3, 3, 4)
        assert np.allclose(P[:, 1, 2], c.point(grid[1, 2]))


class TestGeodesicReflection:
    def test_e1_e2(self):
        assert np.allclose(geodesic_reflection(E1, E2).matrix, np.diag([1.0, 1.0, -1.0]))

    def test_defining_properties(self, rng):
        for _ in range(50):
            M1 = rng.normal(size=3)
            M2 = rng.normal(size=3)
            r = geodesic_reflection(M1, M2)
            assert r.det_sign == -1
            assert np.allclose(r @ M1, M1, atol=1e-12)
            assert np.allclose(r @ M2, M2, atol=1e-12)
            assert (r @ r).allclose(Orthogonal3.identity())

    def test_collinear(self):
        with pytest.raises(UndefinedGeodesicError):
            geodesic_reflection(E1, 2 * E1)
        with pytest.raises(UndefinedGeodesicError):
            geodesic_reflection(np.zeros(3), E1)
