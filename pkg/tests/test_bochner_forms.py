import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ortho_group

from curvature2k.bochner_forms import (
    PForm, SignClass, betti_certificate, curvature_term, derivation_matrix, multi_indices,
    norm_identity_check, p_ricci_check, q_lower_bound_check, q_quantity, s_action, sign_class,
    sort_with_sign, weight_principle_check, weitzenbock_oracle,
)
from curvature2k.cones import a_np
from curvature2k.curvature_ops import constant_curvature, random_curvature, ricci
from curvature2k.implications import Verdict
from curvature2k.model_spaces import build, cylinder, einstein_sphere_product, flat
from curvature2k.tensor_space import standard_basis_S20


def brute_action(a, w: PForm) -> np.ndarray:
    """Derivation on the full alternating array, one slot at a time."""
    full = w.full_tensor()
    out = np.zeros_like(full)
    for k in range(w.p):
        out += np.moveaxis(np.tensordot(a, full, axes=(0, k)), 0, k)
    return np.array([out[I] for I in multi_indices(w.n, w.p)])


def test_sort_with_sign():
    assert sort_with_sign((2, 0, 1)) == (1, (0, 1, 2))
    assert sort_with_sign((1, 0)) == (-1, (0, 1))
    assert sort_with_sign((1, 1))[0] == 0


def test_pform_component_and_basis():
    w = PForm.basis(4, (2, 0))
    assert w.component((0, 2)) == -1.0
    assert w.component((2, 0)) == 1.0
    with pytest.raises(ValueError):
        PForm(4, 2, np.zeros(5))


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 6), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_derivation_matches_brute_force(n, p, seed):
    p = min(p, n - 1)
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    w = PForm.random(n, p, rng)
    assert np.allclose(derivation_matrix(a, p) @ w.coeffs, brute_action(a, w), atol=1e-12)
    assert np.allclose(s_action(a, w).coeffs, brute_action(a, w), atol=1e-12)


@pytest.mark.parametrize("n,p", [(4, 1), (5, 2), (6, 3), (7, 2)])
def test_norm_identity(n, p, rng):
    w = PForm.random(n, p, rng)
    lhs, rhs = norm_identity_check(w)
    assert rhs == pytest.approx(lhs, rel=1e-10)
    # any orthonormal basis works
    f = ortho_group.rvs(n, random_state=1)
    rotated = np.einsum("ij,ajk,lk->ail", f, standard_basis_S20(n), f)
    assert norm_identity_check(w, rotated)[1] == pytest.approx(lhs, rel=1e-10)


@pytest.mark.parametrize("n,p", [(5, 2), (6, 2), (6, 3), (4, 1)])
def test_curvature_term_matches_oracle(n, p):
    for seed in range(5):
        r = random_curvature(n, seed)
        assert np.abs(curvature_term(r, p).matrix - weitzenbock_oracle(r, p).matrix).max() <= 1e-9


def test_unit_sphere_curvature_term():
    for n, p in [(5, 2), (6, 3)]:
        eig = curvature_term(constant_curvature(n), p).eigenvalues
        assert np.allclose(eig, 1.5 * p * (n - p))


def test_ricci_part_is_quadratic_form(rng):
    # (1/p) <D(Ric) w, w> equals the contraction Ric_ij w_i.. w_j.. / (p-1)! over full arrays
    r = random_curvature(5, 2)
    w = PForm.random(5, 2, rng)
    full = w.full_tensor()
    direct = np.einsum("ij,ik,jk->", ricci(r), full, full)
    assert w.coeffs @ derivation_matrix(ricci(r), 2) @ w.coeffs / 2 == pytest.approx(direct / 2)


@settings(max_examples=15, deadline=None)
@given(st.integers(4, 7), st.integers(0, 2**32 - 1))
def test_q_identity_and_bound(n, seed):
    r = random_curvature(n, seed)
    f = ortho_group.rvs(n, random_state=seed % 1000)
    for p in range(2, n // 2 + 1):
        q_def, q_id = q_quantity(r, p, f)
        assert q_def == pytest.approx(q_id, abs=1e-9)
        assert q_lower_bound_check(r, p, [None, f])


def test_p_ricci_exact_below_sampled():
    rep = p_ricci_check(random_curvature(6, 3), 2, 0.1, np.random.default_rng(0))
    assert rep.detail["exact_min"] <= rep.detail["sampled_min"] + 1e-12
    assert rep.verdict in set(Verdict)


def test_weight_principle_on_sphere():
    hyp, low = weight_principle_check(constant_curvature(5), 2, 0.0)
    assert hyp > 0 and low > 0


def test_sign_class():
    assert sign_class(1.0) is SignClass.POSITIVE
    assert sign_class(-1e-12) is SignClass.SEMIDEFINITE
    assert sign_class(-1.0) is SignClass.INDEFINITE


def test_betti_certificates_on_models():
    c = betti_certificate(build(einstein_sphere_product(6, 2)), 3, 1.25)
    assert c.sign is SignClass.POSITIVE
    c = betti_certificate(build(einstein_sphere_product(6, 2)), 2, 1.25)
    assert c.sign is SignClass.SEMIDEFINITE
    assert betti_certificate(build(flat(6)), 2).sign is SignClass.SEMIDEFINITE
    c = betti_certificate(constant_curvature(7), 2)
    assert c.sign is SignClass.POSITIVE and c.theta == pytest.approx(a_np(7, 2))
    with pytest.raises(ValueError):
        betti_certificate(build(cylinder(4)), 2)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_cylinder_p1_ricci_margin(n):
    # on the cone boundary at alpha=(n-1)/2 the bound is -mean and Ricci has a zero mode,
    # so the margin equals the mean eigenvalue (n-2)/n rather than zero
    from curvature2k.cones import theta_cylinder
    rep = p_ricci_check(build(cylinder(n)), 1, theta_cylinder(n, (n - 1) / 2))
    assert abs(rep.hypothesis_margin) <= 1e-12
    assert rep.conclusion_margin == pytest.approx((n - 2) / n, abs=1e-12)
