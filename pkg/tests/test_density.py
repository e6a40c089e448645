"""The four density levels and the map-level energy accounting.

hard_density lives on full gradients, segment_density and reduced_density
on first columns (before and after relaxation), soft_density replaces the
hard membership constraint by a transverse-shear penalty. Oracles pin a
few closed-form values; the rest are structural relations between the
levels.
"""

import math

import numpy as np
import pytest

from slipform import (
    InvalidRange,
    ShearState,
    SlipSystem,
    build_recovery,
    convexify_oracle,
    energy_of_map,
    hard_density,
    LimitProfile,
    make_shear,
    reduced_density,
    segment_density,
    soft_density,
)

E2 = SlipSystem([0.0, 1.0])
DIAG = SlipSystem([1.0, 1.0])


def test_hard_density_is_shear_squared_on_family():
    rng = np.random.default_rng(3)
    for system in (E2, DIAG, SlipSystem([1.0, 2.0])):
        for _ in range(20):
            th, ga = rng.uniform(-2, 2), rng.uniform(-2, 2)
            val = hard_density(system, make_shear(system, th, ga))
            assert val.finite
            assert float(val) == pytest.approx(ga * ga, abs=1e-10)
    off = hard_density(E2, np.diag([2.0, 0.5]))
    assert not off.finite and math.isinf(float(off))


def test_reduced_density_oracles():
    # e2 outside the disk: r^2 - 1
    assert float(reduced_density(E2, np.array([2.0, 0.0]))) == pytest.approx(3.0, abs=1e-12)
    # diagonal slip at r = sqrt(2): 4 - 2 sqrt(3)
    val = float(reduced_density(DIAG, np.array([1.0, 1.0])))
    assert val == pytest.approx(4.0 - 2.0 * math.sqrt(3.0), abs=1e-12)
    # inside the closed unit disk everything relaxes to zero
    for system in (E2, DIAG, SlipSystem([1.0, 0.0])):
        assert float(reduced_density(system, np.array([0.3, -0.4]))) == 0.0
        assert float(reduced_density(system, np.array([1.0, 0.0]))) == 0.0
    # slip along e1 cannot absorb a longer column
    assert math.isinf(float(reduced_density(SlipSystem([1.0, 0.0]), np.array([2.0, 0.0]))))


def test_reduced_density_radial_and_even_in_slip_sign():
    rng = np.random.default_rng(5)
    for _ in range(30):
        r = rng.uniform(0.0, 4.0)
        ang = rng.uniform(0.0, 2.0 * math.pi)
        xi = r * np.array([math.cos(ang), math.sin(ang)])
        a = float(reduced_density(DIAG, xi))
        b = float(reduced_density(DIAG, np.array([r, 0.0])))
        c = float(reduced_density(SlipSystem([-1.0, -1.0]), xi))
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
        assert a == pytest.approx(c, rel=1e-12, abs=1e-12)


def test_segment_density_is_the_unrelaxed_level():
    # outside the unit disk the relaxation is inactive, so the levels agree
    rng = np.random.default_rng(9)
    for system in (E2, DIAG, SlipSystem([1.0, 2.0])):
        for _ in range(25):
            r = rng.uniform(1.0 + 1e-9, 4.0)
            ang = rng.uniform(0.0, 2.0 * math.pi)
            xi = r * np.array([math.cos(ang), math.sin(ang)])
            seg = float(segment_density(system, xi))
            rel = float(reduced_density(system, xi))
            assert seg == pytest.approx(rel, rel=1e-9, abs=1e-9)
    # strictly inside, segment stays positive (or infinite) while relaxed is 0
    seg_in = segment_density(DIAG, np.array([0.9, 0.0]))
    assert float(seg_in) > 0.0
    assert float(reduced_density(DIAG, np.array([0.9, 0.0]))) == 0.0
    assert not segment_density(E2, np.array([0.5, 0.0])).finite
    # minimal-shear oracle at sqrt(2) for diagonal slip: gamma = 1 - sqrt(3)
    st_val = float(segment_density(DIAG, np.array([1.0, 1.0])))
    assert st_val == pytest.approx((1.0 - math.sqrt(3.0)) ** 2, abs=1e-12)


def test_convexify_oracle_recovers_reduced_density():
    # Envelope error near the detachment radius is O(spacing^2) because the
    # profile leaves the floor with zero slope; 4096 samples leave headroom.
    for system in (E2, DIAG, SlipSystem([1.0, 2.0])):
        table = convexify_oracle(system, 5.0, 4096)
        closed = np.array([float(reduced_density(system, (r, 0.0))) for r in table[:, 0]])
        assert table.shape == (4096, 2)
        assert np.max(np.abs(table[:, 1] - closed)) < 1e-3
        assert np.all(table[table[:, 0] <= 1.0, 1] <= 1e-12)


def test_convexify_oracle_rejects_bad_ranges():
    with pytest.raises(InvalidRange):
        convexify_oracle(DIAG, 1.0, 512)
    with pytest.raises(ValueError, match="samples"):
        convexify_oracle(DIAG, 4.0, 10)
    with pytest.raises(ValueError, match="e1"):
        convexify_oracle(SlipSystem([1.0, 0.0]), 4.0, 512)


def test_soft_density_vanishes_at_rotations():
    # exactly representable rotations give exactly zero; general angles
    # carry the cos^2 + sin^2 rounding of the input, order 1e-32
    for F in (np.eye(2), np.array([[0.0, -1.0], [1.0, 0.0]]), -np.eye(2)):
        for eps in (1.0, 1e-3, 1e-8):
            assert soft_density(E2, F, eps) == 0.0
            assert soft_density(DIAG, F, eps) == 0.0
    for th in np.linspace(-math.pi, math.pi, 17):
        F = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        assert soft_density(E2, F, 1.0) <= 1e-30


def test_soft_density_bounded_by_hard_and_tightens_with_eps():
    rng = np.random.default_rng(21)
    for system in (E2, DIAG):
        for _ in range(20):
            th, ga = rng.uniform(-2, 2), rng.uniform(-1.5, 1.5)
            F = make_shear(system, th, ga)
            hard = float(hard_density(system, F))
            prev = -1.0
            for eps in (1e-1, 1e-3, 1e-6):
                soft = soft_density(system, F, eps)
                assert soft <= hard + 1e-15
                assert soft >= prev - 1e-12  # monotone in shrinking eps
                prev = soft
            assert soft_density(system, F, 1e-9) == pytest.approx(hard, rel=1e-5, abs=1e-9)


def test_soft_density_finite_off_family():
    F = np.array([[1.4, 0.2], [0.0, 0.8]])
    v = soft_density(E2, F, 0.01)
    assert math.isfinite(v) and v > 0.0
    assert math.isinf(float(hard_density(E2, F)))


def test_energy_of_map_matches_cellwise_sum():
    profile = LimitProfile([0.0, 4.0, 8.0], [[1.2, 0.3], [0.2, 1.3]])
    res = build_recovery(E2, profile, 0.05)
    rep = energy_of_map(res.map, mode="hard")
    assert rep.finite
    manual = sum(ce.area * ce.value for ce in rep.per_cell)
    assert rep.total == pytest.approx(manual, rel=1e-12)
    assert rep.rescaled == pytest.approx(rep.total / 0.05, rel=1e-12)
    # soft accounting is never above hard on the same mesh
    soft = energy_of_map(res.map, mode="soft", eps=1e-4)
    assert soft.total <= rep.total + 1e-12


def test_energy_of_map_flags_inadmissible_cells():
    profile = LimitProfile([0.0, 4.0, 8.0], [[1.2, 0.3], [0.2, 1.3]])
    res = build_recovery(E2, profile, 0.05)
    broken = res.map.copy()
    broken.cells[0].gradient[0, 0] += 1e-3
    rep = energy_of_map(broken, mode="hard")
    assert not rep.finite
    assert 0 in rep.offenders
