import numpy as np
import pytest
from scipy.stats import ortho_group

from curvature2k.cones import b_malpha
from curvature2k.curvature_ops import random_curvature
from curvature2k.kahler_tools import (
    ComplexStructure, build_kahler_bases, constant_hsc, hsc_variance, kahler_cone_diagnostic,
    kahler_dimension, kahler_residual, project_kahler, random_kahler, trace_identities, xi_identity,
)
from curvature2k.model_spaces import build, cp, cp_product
from curvature2k.tensor_space import gram


def test_complex_structure_validation():
    with pytest.raises(ValueError):
        ComplexStructure(np.eye(4))
    cs = ComplexStructure.standard(3)
    assert cs.n == 6 and cs.m == 3
    f = cs.adapted_frame(np.random.default_rng(0))
    assert cs.is_adapted(f)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_kahler_dimension(m):
    assert kahler_dimension(m) == m * m * (m + 1) ** 2 // 4


def test_projection_is_kahler_and_idempotent():
    cs = ComplexStructure.standard(2)
    r = project_kahler(random_curvature(4, 0), cs)
    assert kahler_residual(r, cs) < 1e-12
    assert np.allclose(project_kahler(r, cs).matrix, r.matrix, atol=1e-12)


def test_projection_general_structure():
    q = ortho_group.rvs(4, random_state=2)
    j = q @ ComplexStructure.standard(2).j @ q.T
    r = project_kahler(random_curvature(4, 1), j)
    assert kahler_residual(r, j) < 1e-12
    assert r.norm() > 0


@pytest.mark.parametrize("m", [2, 3, 4])
def test_constant_hsc_reproduces_cp(m):
    r, cs = constant_hsc(m, 4.0)
    assert np.array_equal(r.matrix, build(cp(m)).matrix)
    assert hsc_variance(r, cs) < 1e-20


@pytest.mark.parametrize("m", [2, 3])
def test_kahler_bases(m):
    cs = ComplexStructure.standard(m)
    f = cs.adapted_frame(np.random.default_rng(m))
    kb = build_kahler_bases(f, cs)
    assert len(kb.minus) == m * m - 1 and len(kb.plus) == m * (m + 1)
    allb = kb.all
    assert np.allclose(gram(allb), np.eye(len(allb)), atol=1e-12)
    assert np.allclose(np.trace(allb, axis1=1, axis2=2), 0, atol=1e-12)
    op = build(cp(m)).second_kind
    assert all(op.form(t) == pytest.approx(-2.0) for t in kb.minus)
    assert all(op.form(t) == pytest.approx(4.0) for t in kb.plus)


@pytest.mark.parametrize("m", [2, 3])
def test_trace_and_xi_identities(m):
    r, cs = random_kahler(m, 3)
    f = cs.adapted_frame(np.random.default_rng(1))
    assert trace_identities(r, cs, f).max() < 1e-10
    lhs, rhs = xi_identity(r, cs, f, 0, 1)
    assert lhs == pytest.approx(rhs, abs=1e-10)
    with pytest.raises(ValueError):
        trace_identities(random_curvature(2 * m, 0), cs)


def test_diagnostic_cases():
    r, cs = constant_hsc(2, 4.0)
    d = kahler_cone_diagnostic(r, cs, 2.0, b_malpha(2, 2.0))
    assert d.case == "boundary" and d.passed and d.member_sign == 1
    d = kahler_cone_diagnostic(r, cs, 2.0, 0.5 * b_malpha(2, 2.0))
    assert d.case == "outside"
    rk, cs = random_kahler(2, 0)
    d = kahler_cone_diagnostic(0 * rk, cs, 2.0, 0.5)
    assert d.case == "below" and d.passed


def test_cp1_cp1_excluded_case():
    r = build(cp_product(1, 2))
    cs = ComplexStructure.standard(2)
    d = kahler_cone_diagnostic(r, cs, 3.0, b_malpha(2, 3.0))
    assert d.case == "excluded"
    assert abs(d.plus_margin) <= 1e-9
    assert d.hsc_variance > 1e-3
