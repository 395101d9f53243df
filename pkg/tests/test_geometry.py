"""Rotation convention, polar charts, frames, and cube membership."""

import math

import numpy as np
import pytest

from rotamax import (
    AxisAngle,
    Correspondence,
    PolarCoord,
    SingularIntrinsicsError,
    SphericalCube,
    UnitVec3,
    ZeroLineError,
    cube_contains,
    h1,
    h2,
    pixel_line_to_normal,
    polar_to_unit,
    residual,
    rodrigues,
    rotation_distance,
    unit_to_polar,
)

RNG = np.random.default_rng(101)


def _unit(rng=RNG):
    w = rng.normal(size=3)
    return w / np.linalg.norm(w)


class TestUnitVec3:
    def test_normalizes(self):
        u = UnitVec3(3.0, 0.0, 4.0)
        assert math.isclose(np.linalg.norm(u.as_array()), 1.0, abs_tol=1e-15)
        assert math.isclose(u.x, 0.6) and math.isclose(u.z, 0.8)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            UnitVec3(0.0, 0.0, 0.0)

    def test_negated(self):
        u = UnitVec3(1.0, 2.0, -2.0)
        assert np.allclose(u.negated().as_array(), -u.as_array())


class TestRotation:
    def test_z_axis_quarter_turn(self):
        q = rodrigues(UnitVec3(0.0, 0.0, 1.0), math.pi / 2)
        assert np.allclose(q @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_orthonormal(self):
        for _ in range(20):
            q = rodrigues(UnitVec3.from_array(_unit()), RNG.uniform(0, math.pi))
            assert np.allclose(q @ q.T, np.eye(3), atol=1e-14)
            assert math.isclose(np.linalg.det(q), 1.0, abs_tol=1e-12)

    def test_distance_recovers_angle(self):
        for _ in range(20):
            th = RNG.uniform(0, math.pi)
            q = rodrigues(UnitVec3.from_array(_unit()), th)
            assert math.isclose(rotation_distance(q, np.eye(3)), th, abs_tol=1e-9)

    def test_theta_range_enforced(self):
        with pytest.raises(ValueError):
            AxisAngle(UnitVec3(0, 0, 1), -0.1)
        with pytest.raises(ValueError):
            AxisAngle(UnitVec3(0, 0, 1), math.pi + 0.1)


class TestPolar:
    def test_roundtrip(self):
        for _ in range(50):
            u = UnitVec3.from_array(_unit())
            assert np.allclose(
                polar_to_unit(unit_to_polar(u)).as_array(), u.as_array(), atol=1e-14
            )

    def test_poles(self):
        north = unit_to_polar(UnitVec3(0.0, 0.0, 1.0))
        assert north.alpha == 0.0 and north.phi == 0.0
        south = unit_to_polar(UnitVec3(0.0, 0.0, -1.0))
        assert math.isclose(south.alpha, math.pi)

    def test_phi_wrapped(self):
        p = PolarCoord(1.0, 2.0 * math.pi + 0.5)
        assert math.isclose(p.phi, 0.5, abs_tol=1e-12)


class TestResidualDecomposition:
    def test_matches_rotated_dot(self):
        # n . (Q v) must equal a + sin(t) h1 + (1 - cos(t)) h2
        for _ in range(100):
            s = Correspondence.from_vectors(_unit(), _unit())
            u = UnitVec3.from_array(_unit())
            th = RNG.uniform(0, math.pi)
            direct = float(
                s.n.as_array() @ (rodrigues(u, th) @ s.v.as_array())
            )
            assert math.isclose(
                residual(s, AxisAngle(u, th)), direct, abs_tol=1e-12
            )

    def test_h1_extremes_at_frames(self):
        for _ in range(50):
            s = Correspondence.from_vectors(_unit(), _unit())
            if s.degenerate:
                continue
            assert math.isclose(h1(s, s.c), s.w, abs_tol=1e-12)
            assert math.isclose(h1(s, s.c.negated()), -s.w, abs_tol=1e-12)

    def test_h2_extremes_at_frames(self):
        for _ in range(50):
            s = Correspondence.from_vectors(_unit(), _unit())
            assert math.isclose(h2(s, s.m), (1.0 - s.a) / 2.0, abs_tol=1e-12)
            assert math.isclose(h2(s, s.m_perp), -(1.0 + s.a) / 2.0, abs_tol=1e-12)

    def test_global_extremes_by_sampling(self):
        s = Correspondence.from_vectors(_unit(), _unit())
        best1 = best2 = -np.inf
        for _ in range(4000):
            u = UnitVec3.from_array(_unit())
            best1 = max(best1, h1(s, u))
            best2 = max(best2, h2(s, u))
        assert best1 <= s.w + 1e-12
        assert best2 <= (1.0 - s.a) / 2.0 + 1e-12


class TestPixelLine:
    def test_known_intrinsics(self):
        k = np.array([[500.0, 0.0, 320.0], [0.0, 500.0, 240.0], [0.0, 0.0, 1.0]])
        n = pixel_line_to_normal((0.0, 1.0, -240.0), k)
        # row [0,1,-240] @ K = [0, 500, 0]: the horizontal line through the
        # principal point maps to the y-axis normal
        assert np.allclose(np.abs(n.as_array()), [0, 1, 0], atol=1e-15)

    def test_zero_line_rejected(self):
        k = np.eye(3)
        with pytest.raises(ZeroLineError):
            pixel_line_to_normal((0.0, 0.0, 0.0), k)

    def test_singular_intrinsics_rejected(self):
        k = np.zeros((3, 3))
        with pytest.raises(SingularIntrinsicsError):
            pixel_line_to_normal((1.0, 0.0, 0.0), k)


class TestSphericalCube:
    def test_full_sphere_contains_everything(self):
        cube = SphericalCube.full_sphere()
        for _ in range(100):
            assert cube_contains(cube, UnitVec3.from_array(_unit()))

    def test_wrapped_membership(self):
        cube = SphericalCube(0.5, 1.0, 6.0, 6.8)  # crosses 2*pi
        inside = polar_to_unit(PolarCoord(0.7, 0.2))
        outside = polar_to_unit(PolarCoord(0.7, 3.0))
        assert cube_contains(cube, inside)
        assert not cube_contains(cube, outside)

    def test_pole_ignores_phi(self):
        cube = SphericalCube(0.0, 0.3, 1.0, 1.5)
        assert cube_contains(cube, UnitVec3(0.0, 0.0, 1.0))

    def test_widths_and_center(self):
        cube = SphericalCube(0.2, 0.8, 5.9, 6.5)
        assert math.isclose(cube.alpha_width, 0.6)
        assert math.isclose(cube.phi_width, 0.6)
        c = cube.center()
        assert math.isclose(c.alpha, 0.5)
        assert math.isclose(c.phi, (6.2) % (2 * math.pi), abs_tol=1e-12)

    def test_corners_members(self):
        cube = SphericalCube(0.2, 0.9, 1.1, 2.3)
        for corner in cube.corners():
            assert cube_contains(cube, polar_to_unit(corner))

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            SphericalCube(0.8, 0.2, 0.0, 1.0)
        with pytest.raises(ValueError):
            SphericalCube(-0.1, 0.2, 0.0, 1.0)


class TestCorrespondenceFrames:
    def test_frames_unit_and_orthogonal(self):
        for _ in range(50):
            s = Correspondence.from_vectors(_unit(), _unit())
            for vec in (s.c, s.m, s.m_perp):
                assert math.isclose(
                    np.linalg.norm(vec.as_array()), 1.0, abs_tol=1e-12
                )
            assert math.isclose(
                float(s.m.as_array() @ s.m_perp.as_array()), 0.0, abs_tol=1e-9
            )

    def test_degenerate_detection(self):
        v = _unit()
        s = Correspondence.from_vectors(v, v)
        assert s.degenerate and s.w < 1e-9
        # fabricated frames are still unit and orthogonal to v
        assert math.isclose(np.linalg.norm(s.c.as_array()), 1.0, abs_tol=1e-12)
        assert abs(float(s.c.as_array() @ v)) < 1e-9
