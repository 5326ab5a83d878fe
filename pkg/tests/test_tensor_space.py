import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvature2k.tensor_space import (
    check_dim, gram, n_traceless, n_wedge, project_traceless, standard_basis_S20, sym,
    sym_inner, symmetric_product, traceless_coords, traceless_diagonal, wedge, wedge_basis,
    wedge_coords, wedge_inner,
)

dims = st.integers(min_value=2, max_value=8)


def test_dimension_counts():
    assert [n_traceless(n) for n in (2, 3, 4, 5)] == [2, 5, 9, 14]
    assert [n_wedge(n) for n in (2, 3, 4)] == [1, 3, 6]


def test_products():
    u, v = np.array([1.0, 2.0]), np.array([0.0, 1.0])
    assert np.allclose(sym(u, v), [[0, 1], [1, 4]])
    assert np.allclose(wedge(u, v), [[0, 1], [-1, 0]])
    assert np.allclose(symmetric_product(0, 0, 3), np.diag([2.0, 0, 0]))
    with pytest.raises(IndexError):
        symmetric_product(0, 3, 3)


def test_inner_products_normalize_standard_elements():
    e = np.eye(4)
    assert sym_inner(sym(e[0], e[1]), sym(e[0], e[1])) == pytest.approx(2.0)
    assert wedge_inner(wedge(e[0], e[1]), wedge(e[0], e[1])) == pytest.approx(1.0)


@given(dims)
def test_basis_orthonormal_and_traceless(n):
    b = standard_basis_S20(n)
    assert b.shape == (n_traceless(n), n, n)
    assert np.allclose(gram(b), np.eye(len(b)), atol=1e-12)
    assert np.allclose(np.trace(b, axis1=1, axis2=2), 0, atol=1e-12)
    assert np.allclose(b, np.swapaxes(b, 1, 2))
    w = wedge_basis(n)
    assert np.allclose(gram(w, wedge_inner), np.eye(len(w)), atol=1e-12)


def test_basis_read_only():
    with pytest.raises(ValueError):
        standard_basis_S20(3)[0, 0, 0] = 1.0


def test_traceless_diagonal_first_element():
    # n=3, k=0: diag(2, -1, -1)/sqrt(6)
    assert np.allclose(traceless_diagonal(0, 3), np.diag([2, -1, -1]) / np.sqrt(6))
    with pytest.raises(IndexError):
        traceless_diagonal(2, 3)


@settings(max_examples=30)
@given(dims, st.integers(0, 2**32 - 1))
def test_coordinates_round_trip(n, seed):
    r = np.random.default_rng(seed)
    h = r.standard_normal((n, n))
    h = h + h.T
    c = traceless_coords(h)
    back = np.tensordot(c, standard_basis_S20(n), axes=1)
    assert np.allclose(back, project_traceless(h), atol=1e-12)
    a = r.standard_normal((n, n))
    wc = wedge_coords(a)
    assert np.allclose(np.tensordot(wc, wedge_basis(n), axes=1), 0.5 * (a - a.T), atol=1e-12)


def test_check_dim():
    assert check_dim(4) == 4
    with pytest.raises(ValueError):
        check_dim(13)
    with pytest.raises(TypeError):
        check_dim(2.5)
