from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvature2k.cones import (
    ConeParams, Membership, a_n2, a_np, b_malpha, boundary_theta, classify, cone_margins,
    cone_membership, cone_monotonicity_check, partial_sum, partial_sums, pic_theta, theta_cylinder,
)
from curvature2k.curvature_ops import constant_curvature, random_curvature


def test_partial_sum_fractional():
    assert partial_sum([1.0, 2.0, 3.0], 1.5) == pytest.approx(2.0)
    assert partial_sum([1.0, 2.0, 3.0], 3) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        partial_sum([2.0, 1.0], 1)
    with pytest.raises(ValueError):
        partial_sum([1.0, 2.0], 2.5)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=12), st.floats(1, 12))
def test_partial_sums_vectorized_agree(vals, x):
    vals = sorted(vals)
    x = min(x, len(vals))
    assert partial_sums(np.array([vals]), x)[0] == pytest.approx(partial_sum(vals, x), abs=1e-9)


def test_params_validation():
    with pytest.raises(ValueError):
        ConeParams(0.5, 0.0)
    with pytest.raises(ValueError):
        ConeParams(2, -1.0)
    with pytest.raises(ValueError):
        ConeParams(5, 0.0).check(3)


def test_classification():
    assert classify(1.0) is Membership.INTERIOR
    assert classify(-1.0) is Membership.OUTSIDE
    assert classify(1e-12) is Membership.BOUNDARY
    v = cone_membership(constant_curvature(4).second_kind, ConeParams(2, 0.0))
    assert v.member and v.margin == pytest.approx(1.0)


def test_boundary_theta_zeroes_margin():
    eigs = np.array([-1.0, 0.5, 2.0, 3.0])
    th = boundary_theta(eigs, 1.7)
    assert cone_margins(eigs, 1.7, th) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        boundary_theta(-eigs[::-1], 1.0)


@pytest.mark.parametrize("n", range(3, 9))
def test_cylinder_threshold_continuous_at_n(n):
    eps = 1e-9
    assert theta_cylinder(n, n + eps) == pytest.approx(theta_cylinder(n, n), abs=1e-7)


def test_exact_thresholds():
    assert Fraction(a_np(5, 2)).limit_denominator(1000) == Fraction(88, 137)
    for n in range(5, 13):
        assert a_np(n, 2) == pytest.approx(a_n2(n), rel=1e-14)
        if n % 2 == 0:
            assert a_np(n, n // 2) == pytest.approx(2 * (n - 1) / (n + 2), rel=1e-14)
    assert b_malpha(2, 3) == pytest.approx(1.0)
    for a in np.linspace(3, 8.9, 20):
        assert b_malpha(2, a) == pytest.approx(pic_theta(a)) == pytest.approx(9 / a - 2)
    with pytest.raises(ValueError):
        a_np(4, 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.floats(1, 4), st.floats(0, 2), st.floats(0, 4), st.floats(0, 1))
def test_cone_monotone_in_parameters(seed, a1, da, t1, dt):
    op = random_curvature(4, seed).second_kind
    assert cone_monotonicity_check(op, a1, min(a1 + da, 8.5), t1, t1 + dt)
