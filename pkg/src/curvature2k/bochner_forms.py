"""Algebra of p-forms for the Bochner curvature term.

p-forms are dense coefficient vectors over strictly increasing multi-indices
(lexicographic order), so ``|w|^2`` is the plain Euclidean norm of the vector.
A matrix ``A`` acts on forms as a derivation,
``(A w)(X_1..X_p) = sum_k w(X_1, .., A X_k, .., X_p)``, represented by the
matrix ``derivation_matrix(A, p)``.

The Ricci pairing uses the increasing-index bookkeeping
``Ric(w, w) = (1/p) <D(Ric) w, w>``, which in a Ricci eigenframe reads
``(1/p) sum_I (sum_{i in I} R_ii) w_I^2`` with I increasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .cones import CONE_TOL, ConeParams, a_np, cone_margins, cone_membership, partial_sum
from .curvature_ops import AlgebraicCurvature, check_frame, random_frames, ricci, scalar
from .implications import ImplicationReport, judge
from .tensor_space import EXACT_TOL, standard_basis_S20, traceless_diagonal, wedge_basis

SIGN_TOL = 1e-8


# ---------------------------------------------------------------------------
# multi-indices and forms


@lru_cache(maxsize=None)
def multi_indices(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    if not 0 <= p <= n:
        raise ValueError(f"degree p={p} outside [0, {n}]")
    return tuple(combinations(range(n), p))


@lru_cache(maxsize=None)
def _index_lookup(n: int, p: int) -> dict:
    return {I: k for k, I in enumerate(multi_indices(n, p))}


def sort_with_sign(idx) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted tuple; sign 0 on repeats."""
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, tuple(sorted(idx))
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(idx)


@dataclass(frozen=True)
class PForm:
    n: int
    p: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (comb(self.n, self.p),):
            raise ValueError(f"expected {comb(self.n, self.p)} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def random(cls, n: int, p: int, rng: np.random.Generator) -> "PForm":
        return cls(n, p, rng.standard_normal(comb(n, p)))

    @classmethod
    def basis(cls, n: int, idx) -> "PForm":
        sign, key = sort_with_sign(idx)
        if sign == 0:
            raise ValueError("repeated index")
        c = np.zeros(comb(n, len(key)))
        c[_index_lookup(n, len(key))[key]] = sign
        return cls(n, len(key), c)

    def component(self, idx) -> float:
        """Alternating extension: ``w_{i_1..i_p}`` for any index tuple."""
        sign, key = sort_with_sign(idx)
        if sign == 0:
            return 0.0
        return sign * float(self.coeffs[_index_lookup(self.n, self.p)[key]])

    def full_tensor(self) -> np.ndarray:
        """The alternating array with ``n**p`` entries."""
        out = np.zeros((self.n,) * self.p)
        for I, c in zip(multi_indices(self.n, self.p), self.coeffs):
            for perm in _permutations(self.p):
                sign, _ = sort_with_sign(perm)
                out[tuple(I[k] for k in perm)] = sign * c
        return out

    def norm2(self) -> float:
        return float(self.coeffs @ self.coeffs)


@lru_cache(maxsize=None)
def _permutations(p: int):
    from itertools import permutations
    return tuple(permutations(range(p)))


def derivation_matrix(a, p: int) -> np.ndarray:
    """Matrix of the derivation action of ``a`` (n x n) on p-form coefficient vectors."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    idx = multi_indices(n, p)
    look = _index_lookup(n, p)
    d = np.zeros((len(idx), len(idx)))
    for row, I in enumerate(idx):
        for k, ik in enumerate(I):
            for j in range(n):
                coef = a[j, ik]
                if coef == 0.0:
                    continue
                sign, key = sort_with_sign(I[:k] + (j,) + I[k + 1:])
                if sign:
                    d[row, look[key]] += sign * coef
    return d


@lru_cache(maxsize=None)
def _unit_derivations(n: int, p: int) -> np.ndarray:
    """Derivation matrices of every elementary matrix E_{jk}, shape (n, n, C, C)."""
    c = comb(n, p)
    out = np.zeros((n, n, c, c))
    for j in range(n):
        for k in range(n):
            e = np.zeros((n, n))
            e[j, k] = 1.0
            out[j, k] = derivation_matrix(e, p)
    out.setflags(write=False)
    return out


def derivation_matrices(mats, p: int) -> np.ndarray:
    """Batched :func:`derivation_matrix` (linear in the matrix argument)."""
    mats = np.asarray(mats, dtype=float)
    n = mats.shape[-1]
    return np.einsum("...jk,jkab->...ab", mats, _unit_derivations(n, p))


def s_action(s, w: PForm) -> PForm:
    s = np.asarray(s, dtype=float)
    if s.shape != (w.n, w.n):
        raise ValueError(f"tensor shape {s.shape} incompatible with n={w.n}")
    return PForm(w.n, w.p, derivation_matrix(s, w.p) @ w.coeffs)


def _check_degree(n: int, p: int, lo: int = 1, hi: int | None = None) -> None:
    hi = n - 1 if hi is None else hi
    if not lo <= p <= hi:
        raise ValueError(f"degree p={p} outside [{lo}, {hi}] for n={n}")


# ---------------------------------------------------------------------------
# norm identity and curvature term


def norm_identity_check(w: PForm, basis=None) -> tuple[float, float]:
    """``(|w|^2, 2n/(p(n-p)(n+2)) * sum_a |S_a w|^2)`` over an orthonormal basis of S^2_0."""
    n, p = w.n, w.p
    _check_degree(n, p)
    basis = standard_basis_S20(n) if basis is None else np.asarray(basis)
    sw = derivation_matrices(basis, p) @ w.coeffs
    total = float(np.sum(sw * sw))
    return w.norm2(), 2 * n / (p * (n - p) * (n + 2)) * total


@dataclass(frozen=True)
class CurvatureTermOperator:
    """Symmetric matrix of ``w -> (3/2) g(Ric_L(w), w)`` on p-form coefficients."""
    n: int
    p: int
    matrix: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def quadratic(self, w: PForm) -> float:
        return float(w.coeffs @ self.matrix @ w.coeffs)


def _sym(m):
    return 0.5 * (m + m.T)


def _gram_form(coef, d) -> np.ndarray:
    """``sum_ab coef[a, b] D_a^T D_b`` for a stack of derivation matrices ``d``."""
    t = np.tensordot(coef, d, axes=(1, 0))  # t[a] = sum_b coef[a, b] D_b
    return _sym(np.einsum("aji,ajk->ik", d, t, optimize=True))


def weighted_action_form(weights, tensors, p: int) -> np.ndarray:
    """``sum_a weights[a] * D(t_a)^T D(t_a)``."""
    d = derivation_matrices(tensors, p)
    return _gram_form(np.diag(np.asarray(weights, float)), d)


def curvature_term(r: AlgebraicCurvature, p: int, eigentensors=None) -> CurvatureTermOperator:
    """Right-hand side of the curvature-term formula, assembled from second-kind eigentensors.

    ``sum_a lambda_a |S_a w|^2 + p(n-2p)/n Ric(w, w) + p^2/n^2 S |w|^2``.
    ``eigentensors`` overrides the eigenbasis (any orthonormal eigenbasis gives the same matrix).
    """
    n = r.n
    _check_degree(n, p)
    op = r.second_kind
    tensors = op.eigentensors() if eigentensors is None else np.asarray(eigentensors)
    m = weighted_action_form(op.eigenvalues, tensors, p)
    m += (n - 2 * p) / n * derivation_matrix(ricci(r), p)  # p(n-2p)/n * (1/p) D(Ric)
    m += p * p / (n * n) * scalar(r) * np.eye(m.shape[0])
    return CurvatureTermOperator(n, p, _sym(m))


def weitzenbock_oracle(r: AlgebraicCurvature, p: int) -> CurvatureTermOperator:
    """``(3/2) sum_{ab} Rhat_ab D(E_a)^T D(E_b)`` with E_a = e_i ^ e_j acting on vectors.

    Independent of the second-kind operator: uses the first-kind matrix directly.
    """
    n = r.n
    _check_degree(n, p)
    d = derivation_matrices(wedge_basis(n), p)
    return CurvatureTermOperator(n, p, 1.5 * _gram_form(r.matrix, d))


def weight_principle_form(r: AlgebraicCurvature, p: int, beta: float) -> np.ndarray:
    """``sum_a (lambda_a + beta*mean) |S_a w|^2`` in basis-free form, on p-form coefficients."""
    op = r.second_kind
    basis = standard_basis_S20(r.n)
    shifted = op.matrix + beta * op.mean * np.eye(op.size)
    return _gram_form(shifted, derivation_matrices(basis, p))


def weight_principle_check(r: AlgebraicCurvature, p: int, beta: float, tol: float = SIGN_TOL):
    """``(hypothesis margin, min eigenvalue)``; hypothesis is (n+2)/2-nonnegativity of R + beta*mean*id."""
    op = r.second_kind
    shifted = op.eigenvalues + beta * op.mean
    hyp = partial_sum(shifted, (r.n + 2) / 2, check_sorted=False)
    low = float(np.linalg.eigvalsh(weight_principle_form(r, p, beta))[0])
    return hyp, low


# ---------------------------------------------------------------------------
# Q quantity and the p-Ricci bound


def q_quantity(r: AlgebraicCurvature, p: int, frame=None) -> tuple[float, float]:
    """``Q`` from its weighted definition and from ``(n-p+2) sum_{i<p} R_ii - (n-1) p mean``."""
    n = r.n
    _check_degree(n, p, 1, n // 2)
    f = np.eye(n) if frame is None else check_frame(frame, n, count=n)
    rf = r.rotated(f) if frame is not None else r
    t = rf.tensor
    op = rf.second_kind
    # a_ij and b_k are diagonal entries of the operator in the canonical basis of the frame.
    coef = np.diag(op.matrix)
    a = np.zeros((n, n))
    for k, (i, j) in enumerate(combinations(range(n), 2)):
        a[i, j] = a[j, i] = coef[k]
    b = np.array([op.form(traceless_diagonal(k, n)) for k in range(p)])
    inner = sum(a[i, j] for i in range(p) for j in range(i + 1, p))
    cross = sum(a[i, j] for i in range(p) for j in range(p, n))
    q_def = 2 * (n - p + 1) * inner + (n - p) * cross + (n - p) * b.sum()
    ric = np.einsum("kikj->ij", t)
    q_id = (n - p + 2) * np.trace(ric[:p, :p]) - (n - 1) * p * op.mean
    return float(q_def), float(q_id)


def q_lower_bound(r: AlgebraicCurvature, p: int) -> float:
    """Frame-independent lower bound ``2(n-p+1) * partial_sum(spectrum, (n-1)p/2)``."""
    n = r.n
    return 2 * (n - p + 1) * partial_sum(r.second_kind.eigenvalues, (n - 1) * p / 2, check_sorted=False)


def q_lower_bound_check(r: AlgebraicCurvature, p: int, frames=None, tol: float = 1e-9) -> bool:
    """Q over each frame (default: the identity) stays above :func:`q_lower_bound`."""
    _check_degree(r.n, p, 2, r.n // 2)
    bound = q_lower_bound(r, p)
    frames = [None] if frames is None else frames
    return all(q_quantity(r, p, f)[1] >= bound - tol for f in frames)


def p_ricci_bound(n: int, p: int, theta: float) -> float:
    """Coefficient c with ``sum_{i<=p} R_ii >= c * mean`` on C((n-1)p/2, theta)."""
    return (n - 1) * p / (n - p + 2) * (1 - (n - p + 1) * theta)


def p_ricci_check(r: AlgebraicCurvature, p: int, theta: float, rng: np.random.Generator | None = None,
                  frames: int = 200, tol: float = CONE_TOL) -> ImplicationReport:
    """Partial Ricci traces against the bound, over sampled frames and exactly.

    The exact worst frame is the Ricci eigenframe (sum of the p smallest Ricci
    eigenvalues); the verdict uses it, sampled frames are reported alongside.
    """
    n = r.n
    _check_degree(n, p, 1, n // 2)
    alpha = (n - 1) * p / 2
    op = r.second_kind
    hyp = cone_membership(op, ConeParams(alpha, theta), tol).margin
    bound = p_ricci_bound(n, p, theta) * op.mean
    ric = ricci(r)
    exact = float(np.sum(np.linalg.eigvalsh(ric)[:p]))
    rng = np.random.default_rng(0) if rng is None else rng
    fr = random_frames(n, frames, rng)[:, :, :p]
    sampled = float(np.min(np.einsum("fip,ij,fjp->f", fr, ric, fr)))
    concl = exact - bound
    return ImplicationReport("p-ricci", hyp, concl, judge(hyp, concl, tol, tol),
                             {"p": p, "alpha": alpha, "theta": theta, "bound": bound,
                              "exact_min": exact, "sampled_min": sampled, "sampled_margin": sampled - bound})


# ---------------------------------------------------------------------------
# Betti-number certificate


class SignClass(str, Enum):
    POSITIVE = "positive"
    SEMIDEFINITE = "semidefinite"
    INDEFINITE = "indefinite"


def sign_class(low: float, scale: float = 1.0, tol: float = SIGN_TOL) -> SignClass:
    t = tol * max(1.0, scale)
    if low > t:
        return SignClass.POSITIVE
    if low >= -t:
        return SignClass.SEMIDEFINITE
    return SignClass.INDEFINITE


@dataclass(frozen=True)
class BettiCertificate:
    sign: SignClass
    min_eigenvalue: float
    cone_margin: float
    alpha: float
    theta: float

    def to_dict(self) -> dict:
        return {"sign": self.sign.value, "min_eigenvalue": self.min_eigenvalue,
                "cone_margin": self.cone_margin, "alpha": self.alpha, "theta": self.theta}


def betti_certificate(r: AlgebraicCurvature, p: int, theta: float | None = None) -> BettiCertificate:
    """Sign class of the curvature term on p-forms, with the cone margin at ((n+2)/2, theta).

    ``theta`` defaults to the vanishing threshold ``a_np(n, p)``.
    """
    n = r.n
    if n < 5:
        raise ValueError("Betti certificate needs n >= 5")
    _check_degree(n, p, 2, n // 2)
    theta = a_np(n, p) if theta is None else theta
    alpha = (n + 2) / 2
    term = curvature_term(r, p)
    eig = term.eigenvalues
    scale = float(np.max(np.abs(eig))) if eig.size else 1.0
    margin = float(cone_margins(r.second_kind.eigenvalues, alpha, theta))
    return BettiCertificate(sign_class(float(eig[0]), scale), float(eig[0]), margin, alpha, theta)


__all__ = [
    "PForm", "multi_indices", "derivation_matrix", "derivation_matrices", "s_action",
    "norm_identity_check", "CurvatureTermOperator", "curvature_term", "weitzenbock_oracle",
    "weight_principle_form", "weight_principle_check", "q_quantity", "q_lower_bound",
    "q_lower_bound_check", "p_ricci_bound", "p_ricci_check", "SignClass", "BettiCertificate",
    "betti_certificate", "EXACT_TOL",
]
