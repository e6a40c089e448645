"""Slip systems, shear states, and the gradient family they generate.

The family is M(theta, gamma) = R(theta) (I + gamma s x m) with m the
+90 degree rotation of s. Everything downstream leans on three facts
checked here: membership is exactly detectable, the family is frame
covariant, and first columns determine a canonical minimal-shear lift.
"""

import math

import numpy as np
import pytest

from slipform import (
    Infeasible,
    ShearState,
    SlipSystem,
    canonical_angle,
    canonical_angle_difference,
    decompose,
    first_column,
    is_admissible,
    make_shear,
    membership_residual,
    perp,
    rot,
    state_matrix,
)

SYSTEMS = [
    SlipSystem([0.0, 1.0]),
    SlipSystem([1.0, 1.0]),
    SlipSystem([1.0, 2.0]),
    SlipSystem([2.0, 1.0]),
]


def test_slip_system_normalizes_and_rejects_zero():
    sys_raw = SlipSystem([3.0, 4.0])
    assert math.isclose(np.linalg.norm(sys_raw.s), 1.0, abs_tol=1e-15)
    assert np.allclose(sys_raw.m, perp(sys_raw.s))
    assert float(sys_raw.s @ sys_raw.m) == pytest.approx(0.0, abs=1e-16)
    with pytest.raises(ValueError):
        SlipSystem([0.0, 0.0])


def test_rot_and_perp_basics():
    th = 0.7321
    R = rot(th)
    assert np.allclose(R.T @ R, np.eye(2), atol=1e-15)
    assert math.isclose(float(np.linalg.det(R)), 1.0, abs_tol=1e-15)
    v = np.array([0.3, -1.2])
    assert np.allclose(rot(math.pi / 2) @ v, perp(v), atol=1e-15)


def test_canonical_angle_wraps_to_half_open_interval():
    assert canonical_angle(math.pi) == pytest.approx(-math.pi)
    assert canonical_angle(-math.pi) == pytest.approx(-math.pi)
    assert canonical_angle(3.0 * math.pi + 0.1) == pytest.approx(-math.pi + 0.1)
    # difference of pi resolves to the positive turn
    assert canonical_angle_difference(-math.pi) == pytest.approx(math.pi)
    assert canonical_angle_difference(2.0 * math.pi + 0.2) == pytest.approx(0.2)


def test_state_matrix_membership_and_determinant():
    rng = np.random.default_rng(7)
    for system in SYSTEMS:
        for _ in range(25):
            st = ShearState(rng.uniform(-math.pi, math.pi), rng.uniform(-3, 3))
            F = state_matrix(system, st)
            assert membership_residual(system, F) <= 1e-12
            assert is_admissible(system, F)
            assert float(np.linalg.det(F)) == pytest.approx(1.0, abs=1e-12)
            # |F s| = 1: slip direction is carried isometrically
            assert float(np.linalg.norm(F @ system.s)) == pytest.approx(1.0, abs=1e-12)


def test_membership_rejects_off_family_matrices():
    system = SlipSystem([1.0, 1.0])
    F = state_matrix(system, ShearState(0.3, 0.8))
    assert membership_residual(system, F + 1e-3 * np.array([[1.0, 0.0], [0.0, 0.0]])) > 1e-4
    assert not is_admissible(system, 2.0 * np.eye(2))


def test_family_is_frame_covariant():
    # rotating the slip direction conjugates nothing: R M(t, g; s) = M(t + r, g; s)
    # and M(t, g; R s) = R M(t, g; s) R^T
    rng = np.random.default_rng(11)
    for _ in range(20):
        s = rng.normal(size=2)
        if np.linalg.norm(s) < 1e-3:
            continue
        system = SlipSystem(s)
        th, ga, r = rng.uniform(-2, 2, size=3)
        R = rot(r)
        rotated = SlipSystem(R @ system.s)
        lhs = R @ make_shear(system, th, ga) @ R.T
        rhs = make_shear(rotated, th, ga)
        assert np.allclose(lhs, rhs, atol=1e-13)


def test_sign_of_slip_direction_is_immaterial():
    rng = np.random.default_rng(13)
    for s in ([0.0, 1.0], [1.0, 1.0], [2.0, 1.0]):
        plus, minus = SlipSystem(s), SlipSystem(-np.asarray(s))
        for _ in range(10):
            th, ga = rng.uniform(-2, 2, size=2)
            assert np.allclose(make_shear(plus, th, ga), make_shear(minus, th, ga), atol=1e-14)


def test_decompose_round_trips_states():
    rng = np.random.default_rng(17)
    for system in SYSTEMS:
        for _ in range(25):
            st = ShearState(rng.uniform(-math.pi, math.pi), rng.uniform(-3, 3))
            F = state_matrix(system, st)
            back = decompose(system, F)
            assert back.gamma == pytest.approx(st.gamma, abs=1e-10)
            assert canonical_angle_difference(back.theta - st.theta) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(Infeasible):
        decompose(SYSTEMS[0], np.diag([1.0, 2.0]))


def test_first_column_picks_minimal_shear():
    rng = np.random.default_rng(19)
    for system in SYSTEMS:
        s1, s2 = float(system.s[0]), float(system.s[1])
        for _ in range(30):
            xi = rng.normal(size=2) * rng.uniform(0.5, 3.0)
            r2 = float(xi @ xi)
            if r2 < s2 * s2 + 1e-6:
                continue
            st = first_column(system, xi)
            F = state_matrix(system, st)
            assert np.allclose(F[:, 0], xi, atol=1e-9)
            # the other root of the reachability quadratic is never smaller
            root = math.sqrt(r2 - s2 * s2)
            other = max(((s1 - root) / s2, (s1 + root) / s2), key=abs)
            assert abs(st.gamma) <= abs(other) + 1e-12


def test_first_column_tie_takes_positive_shear():
    # |xi| = |s2| collapses the two roots; at |xi| slightly above the
    # minimum both roots have equal magnitude iff s1 = 0
    system = SlipSystem([0.0, 1.0])
    st = first_column(system, np.array([0.0, 1.3]))
    other = first_column(system, np.array([1.3, 0.0]))
    assert st.gamma > 0.0
    assert other.gamma > 0.0


def test_first_column_axis_e1_requires_unit_length():
    system = SlipSystem([1.0, 0.0])
    st = first_column(system, np.array([0.0, 1.0]))
    assert st.gamma == 0.0
    assert st.theta == pytest.approx(math.pi / 2)
    for bad in (np.array([2.0, 0.0]), np.array([0.3, 0.1])):
        with pytest.raises(Infeasible):
            first_column(system, bad)


def test_first_column_unreachable_below_minimum():
    system = SlipSystem([1.0, 1.0])  # reachable radii start at 1/sqrt(2)
    with pytest.raises(Infeasible):
        first_column(system, np.array([0.5, 0.0]))
    st = first_column(system, np.array([1.0 / math.sqrt(2.0) + 1e-9, 0.0]))
    assert math.isfinite(st.gamma)
