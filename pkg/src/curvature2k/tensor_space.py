"""Bases and inner products for two-tensors on a Euclidean space R^n.

Conventions
-----------
* Indices are 0-based throughout the package.
* ``u (.) v = u v^T + v u^T`` and ``u ^ v = u v^T - v u^T``.
* S^2(V) carries ``<A, B> = tr(A^T B)``; two-forms carry ``<A, B> = tr(A^T B) / 2``,
  so ``e_i ^ e_j`` (i < j) is orthonormal.
* The canonical basis of S^2_0(V) lists ``e_i (.) e_j / sqrt(2)`` for i < j in
  lexicographic order, followed by the diagonal tensors ``psi_k`` (k = 0..n-2).
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

# Exact-algebra identities vs. eigenvalue-derived quantities.
EXACT_TOL = 1e-12
EIG_TOL = 1e-9
MAX_DIM = 12


def n_traceless(n: int) -> int:
    """Dimension N = (n-1)(n+2)/2 of S^2_0(R^n)."""
    return (n - 1) * (n + 2) // 2


def n_wedge(n: int) -> int:
    """Dimension n(n-1)/2 of the two-forms on R^n."""
    return n * (n - 1) // 2


def check_dim(n: int, minimum: int = 2, maximum: int = MAX_DIM) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise TypeError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if n < minimum or n > maximum:
        raise ValueError(f"dimension n={n} outside [{minimum}, {maximum}]")
    return n


def sym(u, v) -> np.ndarray:
    """Symmetric product ``u (.) v`` of two vectors."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.outer(u, v) + np.outer(v, u)


def wedge(u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.outer(u, v) - np.outer(v, u)


def symmetric_product(i: int, j: int, n: int) -> np.ndarray:
    """``e_i (.) e_j`` as an n x n matrix.

    Off-diagonal pairs give 1 at (i, j) and (j, i); ``i == j`` gives 2 at (i, i).
    """
    for idx in (i, j):
        if not 0 <= idx < n:
            raise IndexError(f"index {idx} out of range for n={n}")
    out = np.zeros((n, n))
    out[i, j] += 1.0
    out[j, i] += 1.0
    return out


def sym_inner(a, b) -> float:
    return float(np.tensordot(a, b, axes=2))


def wedge_inner(a, b) -> float:
    return 0.5 * float(np.tensordot(a, b, axes=2))


def project_traceless(h) -> np.ndarray:
    """Orthogonal projection ``h - tr(h)/n * Id`` onto S^2_0."""
    h = np.asarray(h, dtype=float)
    n = h.shape[-1]
    tr = np.trace(h, axis1=-2, axis2=-1)
    return h - (tr / n)[..., None, None] * np.eye(n)


def traceless_diagonal(k: int, n: int) -> np.ndarray:
    """Diagonal tensor psi_k: ``(n-k-1) E_kk - sum_{l>k} E_ll``, unit normalized.

    With 0-based k this is the 1-based psi_{k+1} of the usual construction.
    """
    if not 0 <= k < n - 1:
        raise IndexError(f"psi index {k} out of range for n={n}")
    d = np.zeros(n)
    d[k] = n - k - 1
    d[k + 1:] = -1.0
    return np.diag(d) / np.linalg.norm(d)


@lru_cache(maxsize=None)
def wedge_pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(n), 2))


@lru_cache(maxsize=None)
def _standard_basis_S20(n: int) -> np.ndarray:
    out = [symmetric_product(i, j, n) / np.sqrt(2.0) for i, j in wedge_pairs(n)]
    out += [traceless_diagonal(k, n) for k in range(n - 1)]
    basis = np.array(out)
    basis.setflags(write=False)
    return basis


def standard_basis_S20(n: int) -> np.ndarray:
    """Orthonormal basis of S^2_0(R^n), shape (N, n, n), in canonical order."""
    n = check_dim(n)
    return _standard_basis_S20(n)


@lru_cache(maxsize=None)
def _wedge_basis(n: int) -> np.ndarray:
    eye = np.eye(n)
    basis = np.array([wedge(eye[i], eye[j]) for i, j in wedge_pairs(n)])
    basis.setflags(write=False)
    return basis


def wedge_basis(n: int) -> np.ndarray:
    """Orthonormal basis ``e_i ^ e_j`` (i < j) of two-forms, shape (n(n-1)/2, n, n)."""
    n = check_dim(n)
    return _wedge_basis(n)


def gram(basis, inner=sym_inner) -> np.ndarray:
    b = np.asarray(basis)
    flat = b.reshape(len(b), -1)
    g = flat @ flat.T
    return g if inner is sym_inner else 0.5 * g


def traceless_coords(phi) -> np.ndarray:
    """Coordinates of a symmetric tensor's traceless part in the canonical basis."""
    phi = np.asarray(phi, dtype=float)
    n = phi.shape[-1]
    basis = standard_basis_S20(n)
    return np.tensordot(phi, basis, axes=([-2, -1], [1, 2]))


def wedge_coords(omega) -> np.ndarray:
    """Coordinates of a (not necessarily skew) matrix's two-form part in ``e_i ^ e_j``."""
    omega = np.asarray(omega, dtype=float)
    n = omega.shape[-1]
    iu = np.triu_indices(n, 1)
    return 0.5 * (omega[..., iu[0], iu[1]] - omega[..., iu[1], iu[0]])
