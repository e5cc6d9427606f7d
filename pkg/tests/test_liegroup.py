import math

import numpy as np
import pytest

from ppfpose.errors import NotAntisymmetric
from ppfpose.liegroup import (
    Pose,
    Twist,
    compose,
    dist_so3,
    euler_zyx,
    inverse,
    pa,
    rodriguez_map,
    skew,
    so3_exp,
    vex,
    wedge,
)


def rot_z(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_x(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


class TestSkewVex:
    def test_zero(self):
        np.testing.assert_array_equal(skew([0, 0, 0]), np.zeros((3, 3)))

    def test_direct_map(self):
        expected = np.array([[0, -3, 2], [3, 0, -1], [-2, 1, 0]], dtype=float)
        np.testing.assert_array_equal(skew([1, 2, 3]), expected)

    def test_cross_product_identity(self):
        e1, e2, e3 = np.eye(3)
        np.testing.assert_allclose(skew(e1) @ e2, e3)
        rng = np.random.default_rng(1)
        for _ in range(50):
            b, w = rng.normal(size=3), rng.normal(size=3)
            np.testing.assert_allclose(skew(b) @ w, np.cross(b, w), atol=1e-14)

    def test_vex_inverts_skew(self):
        np.testing.assert_array_equal(vex(skew([1, 2, 3])), [1, 2, 3])
        np.testing.assert_array_equal(vex(np.zeros((3, 3))), [0, 0, 0])

    def test_vex_rejects_symmetric(self):
        with pytest.raises(NotAntisymmetric):
            vex(np.eye(3))


class TestPa:
    def test_symmetric_maps_to_zero(self):
        m = np.array([[2.0, 1.0, 0.5], [1.0, -1.0, 3.0], [0.5, 3.0, 0.0]])
        np.testing.assert_array_equal(pa(m), np.zeros((3, 3)))

    def test_idempotent_on_antisymmetric(self):
        m = skew([0.3, -0.7, 1.1])
        np.testing.assert_array_equal(pa(m), m)

    def test_hand_evaluated(self):
        m = np.array([[0.0, -1.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        expected = np.array([[0.0, -1.5, 0.0], [1.5, 0.0, 0.0], [0.0, 0.0, 0.0]])
        np.testing.assert_array_equal(pa(m), expected)


class TestDistSo3:
    def test_identity(self):
        assert dist_so3(np.eye(3)) == 0.0

    def test_half_turn(self):
        assert dist_so3(so3_exp([math.pi, 0, 0])) == pytest.approx(1.0, abs=1e-12)

    def test_quarter_turn_about_z(self):
        assert dist_so3(rot_z(math.pi / 2)) == pytest.approx(0.5, abs=1e-15)

    def test_range(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            d = dist_so3(so3_exp(rng.uniform(-math.pi, math.pi, 3)))
            assert 0.0 <= d <= 1.0


class TestSo3Exp:
    def test_zero(self):
        np.testing.assert_array_equal(so3_exp([0, 0, 0]), np.eye(3))

    def test_axis_angle(self):
        np.testing.assert_allclose(so3_exp([0, 0, math.pi / 2]), rot_z(math.pi / 2), atol=1e-15)

    def test_group_inverse(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            phi = rng.uniform(-math.pi, math.pi, 3)
            np.testing.assert_allclose(so3_exp(phi) @ so3_exp(-phi), np.eye(3), atol=1e-14)

    def test_small_angle_series(self):
        phi = np.array([1e-9, -2e-9, 1.5e-9])
        r = so3_exp(phi)
        np.testing.assert_allclose(vex(pa(r)), phi, rtol=1e-12)


class TestRodriguezMap:
    def test_zero(self):
        r = rodriguez_map([0, 0, 0])
        np.testing.assert_array_equal(r, np.eye(3))
        assert dist_so3(r) == 0.0

    def test_unit_parameter_distance(self):
        rho = np.array([1.0, 0.0, 0.0])
        assert dist_so3(rodriguez_map(rho)) == pytest.approx(0.5, abs=1e-14)
        rho = np.array([1, -1, 1]) / math.sqrt(3.0)
        assert dist_so3(rodriguez_map(rho)) == pytest.approx(0.5, abs=1e-14)

    def test_vex_pa_identity(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            rho = rng.normal(scale=2.0, size=3)
            n2 = rho @ rho
            r = rodriguez_map(rho)
            np.testing.assert_allclose(vex(pa(r)), 2.0 * rho / (1.0 + n2), atol=1e-13)
            # distance identity and its (1 - d) d product
            d = dist_so3(r)
            assert d == pytest.approx(n2 / (1.0 + n2), abs=1e-13)
            assert (1.0 - d) * d == pytest.approx(n2 / (1.0 + n2) ** 2, abs=1e-13)


class TestPoseAlgebra:
    def test_compose_with_inverse(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            a = Pose(r=so3_exp(rng.uniform(-3, 3, 3)), p=rng.normal(size=3))
            ident = compose(a, inverse(a))
            np.testing.assert_allclose(ident.r, np.eye(3), atol=1e-12)
            np.testing.assert_allclose(ident.p, np.zeros(3), atol=1e-12)

    def test_identity_neutral(self):
        b = Pose(r=rot_z(0.7), p=np.array([1.0, -2.0, 3.0]))
        out = compose(Pose.identity(), b)
        np.testing.assert_allclose(out.r, b.r, atol=1e-15)
        np.testing.assert_allclose(out.p, b.p, atol=1e-15)

    def test_group_axioms(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            a = Pose(r=so3_exp(rng.uniform(-3, 3, 3)), p=rng.normal(size=3))
            b = Pose(r=so3_exp(rng.uniform(-3, 3, 3)), p=rng.normal(size=3))
            c = Pose(r=so3_exp(rng.uniform(-3, 3, 3)), p=rng.normal(size=3))
            lhs = compose(compose(a, b), c).as_matrix()
            rhs = compose(a, compose(b, c)).as_matrix()
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)
            np.testing.assert_allclose(
                inverse(inverse(a)).as_matrix(), a.as_matrix(), atol=1e-12
            )

    def test_inverse_components(self):
        a = Pose(r=rot_y(0.4), p=np.array([0.5, 1.5, -2.0]))
        inv = inverse(a)
        np.testing.assert_allclose(inv.r, a.r.T, atol=1e-15)
        np.testing.assert_allclose(inv.p, -(a.r.T @ a.p), atol=1e-15)

    def test_error_pose_at_equality(self):
        a = Pose(r=rot_x(1.1), p=np.array([2.0, 0.0, -1.0]))
        err = compose(a, inverse(a))
        assert dist_so3(err.r) == pytest.approx(0.0, abs=1e-14)

    def test_pose_rejects_non_rotation(self):
        with pytest.raises(ValueError):
            Pose(r=np.eye(3) * 1.001, p=np.zeros(3))
        with pytest.raises(ValueError):
            Pose(r=np.eye(3), p=np.array([np.nan, 0.0, 0.0]))


class TestWedge:
    def test_zero_twist(self):
        np.testing.assert_array_equal(wedge(Twist(np.zeros(3), np.zeros(3))), np.zeros((4, 4)))

    def test_block_structure(self):
        y = Twist(omega=np.array([1.0, 2.0, 3.0]), v=np.array([4.0, 5.0, 6.0]))
        m = wedge(y)
        np.testing.assert_array_equal(m[:3, :3], skew(y.omega))
        np.testing.assert_array_equal(m[:3, 3], y.v)
        np.testing.assert_array_equal(m[3], np.zeros(4))

    def test_bottom_row_zero_random(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m = wedge(Twist(rng.normal(size=3), rng.normal(size=3)))
            np.testing.assert_array_equal(m[3], np.zeros(4))


class TestEulerZyx:
    def test_identity(self):
        np.testing.assert_array_equal(euler_zyx(np.eye(3)), [0.0, 0.0, 0.0])

    def test_yaw_only(self):
        out = euler_zyx(rot_z(math.pi / 2))
        np.testing.assert_allclose(out, [0.0, 0.0, math.pi / 2], atol=1e-15)

    def test_round_trip(self):
        rng = np.random.default_rng(8)
        for _ in range(300):
            roll = rng.uniform(-math.pi, math.pi)
            pitch = rng.uniform(-1.5, 1.5)
            yaw = rng.uniform(-math.pi, math.pi)
            r = rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)
            out = euler_zyx(r)
            np.testing.assert_allclose(out, [roll, pitch, yaw], atol=1e-9)


class TestIdentities:
    def test_trace_identity(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            a = rng.normal(scale=2.0, size=(3, 3))
            beta = rng.normal(scale=2.0, size=3)
            lhs = np.trace(a @ skew(beta))
            rhs = -2.0 * (vex(pa(a)) @ beta)
            tol = 1e-10 * (1.0 + np.linalg.norm(a) * np.linalg.norm(beta))
            assert abs(lhs - rhs) <= tol
            # the antisymmetric part alone carries the whole trace
            assert abs(np.trace(pa(a) @ skew(beta)) - lhs) <= tol

    def test_vexpa_distance_identity(self):
        rng = np.random.default_rng(10)
        for _ in range(10_000):
            r = so3_exp(rng.uniform(-math.pi, math.pi, 3))
            d = dist_so3(r)
            v = vex(pa(r))
            assert abs(v @ v - 4.0 * (1.0 - d) * d) <= 1e-10
