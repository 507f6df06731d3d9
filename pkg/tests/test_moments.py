"""Moment system construction, residual/Jacobian evaluation, and the
layout <-> variable vector maps.

The core oracle here is `naive_residual`, a nested-loop transcription of the
defining equations in raw (unnormalized) coordinates.  The implementation
evaluates the same quantities in normalized coordinates; the two must agree
to floating-point roundoff on arbitrary inputs, not just near solutions.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentpack import BoxSpec, Instance, Layout, Placement, gen_guillotine
from momentpack import moments as mo


def naive_residual(inst, x_lo, y_lo, x_hi, y_hi, max_order, mode):
    """Independent evaluation straight from the definition."""
    a = float(inst.box.width)
    b = float(inst.box.height)
    scale = max(a, b)
    rows = []
    for s1 in range(1, max_order + 1):
        for s2 in range(1, max_order + 1):
            total = 0.0
            for i in range(inst.n_rects):
                total += (x_hi[i] ** s1 - x_lo[i] ** s1) * (
                    y_hi[i] ** s2 - y_lo[i] ** s2
                )
            rows.append(total / (a**s1 * b**s2) - 1.0)
    if mode == mo.ROTATABLE:
        for i in range(inst.n_rects):
            w = float(inst.rects[i].width)
            h = float(inst.rects[i].height)
            dx = x_hi[i] - x_lo[i]
            dy = y_hi[i] - y_lo[i]
            rows.append((dx + dy - w - h) / scale)
            rows.append((dx * dy - w * h) / scale**2)
    return np.array(rows)


def random_corners(inst, rng):
    a = float(inst.box.width)
    b = float(inst.box.height)
    n = inst.n_rects
    x0 = rng.uniform(0, a, n)
    y0 = rng.uniform(0, b, n)
    return x0, y0, x0 + rng.uniform(0, a, n), y0 + rng.uniform(0, b, n)


# -- Truncation default -------------------------------------------------------


def test_default_max_order_matches_ceil_sqrt_formula():
    for n in range(1, 60):
        for mode in (mo.FIXED, mo.ROTATABLE):
            var_count = (2 if mode == mo.FIXED else 4) * n
            expected = max(3, math.ceil(math.sqrt(var_count)) + 1)
            assert mo.default_max_order(n, mode) == expected


def test_default_max_order_spot_values():
    assert mo.default_max_order(1, mo.FIXED) == 3
    assert mo.default_max_order(5, mo.FIXED) == 5
    assert mo.default_max_order(5, mo.ROTATABLE) == 6
    assert mo.default_max_order(12, mo.ROTATABLE) == 8


def test_default_keeps_equations_at_or_above_unknowns():
    for n in range(1, 40):
        for mode in (mo.FIXED, mo.ROTATABLE):
            var_count = (2 if mode == mo.FIXED else 4) * n
            smax = mo.default_max_order(n, mode)
            assert smax * smax >= var_count


# -- System construction ------------------------------------------------------


def test_build_system_shapes_and_exponents():
    inst = Instance.from_sides([(1, 2), (1, 2)], BoxSpec(2, 3))
    sys = mo.build_system(inst, max_order=2, mode=mo.FIXED)
    assert sys.exponents == ((1, 1), (1, 2), (2, 1), (2, 2))
    assert sys.var_count == 4
    assert sys.constraint_count == 0
    assert sys.equation_count == 4
    assert sys.scale == 3.0
    np.testing.assert_allclose(sys.widths, [1 / 3, 1 / 3])
    np.testing.assert_allclose(
        sys.denom, np.outer([2 / 3, (2 / 3) ** 2], [1.0, 1.0])
    )


def test_build_system_rotatable_counts():
    inst = Instance.from_sides([(1, 2)] * 3, BoxSpec(2, 3))
    sys = mo.build_system(inst, max_order=4, mode=mo.ROTATABLE)
    assert sys.var_count == 12
    assert sys.constraint_count == 6
    assert sys.equation_count == 16 + 6


def test_build_system_validation():
    inst = Instance.from_sides([(1, 1)], BoxSpec(1, 1), rotation_allowed=False)
    with pytest.raises(ValueError, match="unknown mode"):
        mo.build_system(inst, mode="diagonal")
    with pytest.raises(ValueError, match="rotation"):
        mo.build_system(inst, mode=mo.ROTATABLE)
    with pytest.raises(ValueError, match="max_order"):
        mo.build_system(inst, max_order=0)


def test_residual_rejects_bad_vectors():
    inst = Instance.from_sides([(1, 1)], BoxSpec(2, 2))
    sys = mo.build_system(inst, max_order=3)
    with pytest.raises(ValueError, match="expected 2 variables"):
        mo.residual(sys, np.zeros(3))
    with pytest.raises(ValueError, match="non-finite"):
        mo.residual(sys, np.array([np.nan, 0.0]))


# -- Residual correctness -----------------------------------------------------


@pytest.mark.parametrize("mode", [mo.FIXED, mo.ROTATABLE])
def test_residual_matches_naive_evaluation(mode):
    rng = np.random.default_rng(11)
    for seed in range(5):
        inst, _ = gen_guillotine(seed, 4, BoxSpec(5.0, 3.0))
        sys = mo.build_system(inst, max_order=4, mode=mode)
        x_lo, y_lo, x_hi, y_hi = random_corners(inst, rng)
        if mode == mo.FIXED:
            vars = np.empty(sys.var_count)
            vars[0::2] = x_lo / sys.scale
            vars[1::2] = y_lo / sys.scale
            x_hi = x_lo + np.array([float(r.width) for r in inst.rects])
            y_hi = y_lo + np.array([float(r.height) for r in inst.rects])
        else:
            vars = np.empty(sys.var_count)
            vars[0::4] = x_lo / sys.scale
            vars[1::4] = y_lo / sys.scale
            vars[2::4] = x_hi / sys.scale
            vars[3::4] = y_hi / sys.scale
        got = mo.residual(sys, vars).stacked
        want = naive_residual(inst, x_lo, y_lo, x_hi, y_hi, 4, mode)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-9)


def test_residual_zero_on_perfect_layouts(squared32, small_corpus):
    pairs = [squared32, *small_corpus]
    for inst, layout in pairs:
        for smax in range(2, 9):
            for mode in (mo.FIXED, mo.ROTATABLE):
                sys = mo.build_system(inst, smax, mode)
                r = mo.residual(sys, mo.layout_to_vars(sys, layout))
                assert r.max_abs <= 1e-9


def test_residual_nonzero_off_solution():
    inst = Instance.from_sides([(1, 2), (1, 2)], BoxSpec(2, 2))
    sys = mo.build_system(inst, max_order=3)
    bad = Layout((Placement(0, 0, 1, 2), Placement(0, 0, 1, 2)))  # stacked copies
    r = mo.residual(sys, mo.layout_to_vars(sys, bad))
    assert r.max_abs > 0.1


@settings(max_examples=25, deadline=None)
@given(perm_seed=st.integers(0, 2**31), point_seed=st.integers(0, 2**31))
def test_residual_invariant_under_rect_permutation(perm_seed, point_seed):
    # The moment rows sum over rectangles, so permuting rectangles together
    # with their placements leaves the stacked moment residual unchanged.
    inst, _ = gen_guillotine(9, 5, BoxSpec(4.0, 4.0))
    rng = np.random.default_rng(point_seed)
    x_lo, y_lo, x_hi, y_hi = random_corners(inst, rng)
    perm = np.random.default_rng(perm_seed).permutation(inst.n_rects)
    sides = [(inst.rects[i].width, inst.rects[i].height) for i in perm]
    inst_p = Instance.from_sides(sides, inst.box)
    sys = mo.build_system(inst, max_order=4, mode=mo.ROTATABLE)
    sys_p = mo.build_system(inst_p, max_order=4, mode=mo.ROTATABLE)

    def pack(system, xl, yl, xh, yh):
        out = np.empty(system.var_count)
        out[0::4] = xl / system.scale
        out[1::4] = yl / system.scale
        out[2::4] = xh / system.scale
        out[3::4] = yh / system.scale
        return out

    r = mo.residual(sys, pack(sys, x_lo, y_lo, x_hi, y_hi))
    r_p = mo.residual(
        sys_p, pack(sys_p, x_lo[perm], y_lo[perm], x_hi[perm], y_hi[perm])
    )
    np.testing.assert_allclose(r_p.moment_part, r.moment_part, rtol=0, atol=1e-12)
    assert r_p.max_abs == pytest.approx(r.max_abs, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(k=st.integers(-2, 6), seed=st.integers(0, 1000))
def test_residual_invariant_under_power_of_two_scaling(k, seed):
    # Rescaling box, sides, and coordinates by 2^k changes nothing after
    # normalization, bit for bit (binary floats scale exactly).
    c = 2.0**k
    inst, layout = gen_guillotine(seed, 4, BoxSpec(5.0, 3.0))
    sides = [(float(r.width) * c, float(r.height) * c) for r in inst.rects]
    inst_s = Instance.from_sides(
        sides, BoxSpec(float(inst.box.width) * c, float(inst.box.height) * c)
    )
    layout_s = Layout(
        tuple(
            Placement(*(float(v) * c for v in p.as_tuple()))
            for p in layout.placements
        )
    )
    for mode in (mo.FIXED, mo.ROTATABLE):
        sys = mo.build_system(inst, 4, mode)
        sys_s = mo.build_system(inst_s, 4, mode)
        r = mo.residual(sys, mo.layout_to_vars(sys, layout)).stacked
        r_s = mo.residual(sys_s, mo.layout_to_vars(sys_s, layout_s)).stacked
        assert np.array_equal(r, r_s)


# -- Jacobian correctness -----------------------------------------------------


@pytest.mark.parametrize("mode", [mo.FIXED, mo.ROTATABLE])
def test_jacobian_matches_central_differences(mode, fd_jac):
    rng = np.random.default_rng(23)
    for seed in range(4):
        inst, _ = gen_guillotine(seed + 100, 3, BoxSpec(4.0, 3.0))
        sys = mo.build_system(inst, max_order=4, mode=mode)
        for _ in range(3):
            x = rng.uniform(0.05, 0.95, sys.var_count)
            jac = mo.jacobian(sys, x)
            ref = fd_jac(sys, x)
            scale = max(1.0, float(np.max(np.abs(jac))))
            assert float(np.max(np.abs(jac - ref))) / scale <= 1e-6


def test_jacobian_shape():
    inst = Instance.from_sides([(1, 2)] * 2, BoxSpec(2, 2))
    sys_f = mo.build_system(inst, 3, mo.FIXED)
    sys_r = mo.build_system(inst, 3, mo.ROTATABLE)
    assert mo.jacobian(sys_f, np.full(4, 0.3)).shape == (9, 4)
    assert mo.jacobian(sys_r, np.full(8, 0.3)).shape == (9 + 4, 8)


# -- Layout <-> variable maps -------------------------------------------------


def test_layout_vars_roundtrip_fixed(small_corpus):
    inst, layout = small_corpus[0]
    sys = mo.build_system(inst, 3, mo.FIXED)
    again = mo.vars_to_layout(sys, mo.layout_to_vars(sys, layout))
    for p, q in zip(layout.placements, again.placements):
        assert float(p.x_lo) == pytest.approx(float(q.x_lo), abs=1e-12)
        assert float(p.y_hi) == pytest.approx(float(q.y_hi), abs=1e-12)


def test_layout_vars_roundtrip_rotatable(small_corpus):
    inst, layout = small_corpus[1]
    sys = mo.build_system(inst, 3, mo.ROTATABLE)
    again = mo.vars_to_layout(sys, mo.layout_to_vars(sys, layout))
    for p, q in zip(layout.placements, again.placements):
        assert [float(v) for v in p.as_tuple()] == pytest.approx(
            [float(v) for v in q.as_tuple()], abs=1e-12
        )


def test_vars_to_layout_sorts_swapped_corners():
    inst = Instance.from_sides([(1, 1)], BoxSpec(2, 2))
    sys = mo.build_system(inst, 3, mo.ROTATABLE)
    layout = mo.vars_to_layout(sys, np.array([0.75, 0.1, 0.25, 0.6]))
    p = layout.placements[0]
    assert (p.x_lo, p.x_hi) == (0.5, 1.5)
    assert (p.y_lo, p.y_hi) == (0.2, 1.2)


def test_layout_to_vars_count_mismatch():
    inst = Instance.from_sides([(1, 1)], BoxSpec(2, 2))
    sys = mo.build_system(inst, 3)
    with pytest.raises(ValueError, match="placements"):
        mo.layout_to_vars(sys, Layout((Placement(0, 0, 1, 1),) * 2))
