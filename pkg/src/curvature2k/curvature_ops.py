"""Algebraic curvature tensors and the operators they induce.

Sign convention: ``R(e_i, e_j, e_i, e_j)`` is the sectional curvature of the
plane ``e_i ^ e_j``. The unit sphere has ``R_ijkl = d_ik d_jl - d_il d_jk``,
``Ric = (n-1) g`` and its second-kind operator is the identity.

A tensor is stored as the symmetric matrix ``M[(ij), (kl)] = R_ijkl`` on the
lexicographic basis ``e_i ^ e_j`` (i < j); this is also the matrix of the
curvature operator acting on two-forms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize
from scipy.stats import ortho_group

from .tensor_space import (
    EIG_TOL,
    EXACT_TOL,
    check_dim,
    n_traceless,
    n_wedge,
    project_traceless,
    standard_basis_S20,
    traceless_coords,
    wedge_pairs,
)

SCHEMA = "curvature2k/1"
BASIS_TAG = "lex-wedge2"
CONVENTION = (
    "matrix[(i,j),(k,l)] = R(e_i,e_j,e_k,e_l) for i<j, k<l (0-based); "
    "R(e_i,e_j,e_i,e_j) is sectional curvature; unit sphere -> identity"
)


class CurvatureError(ValueError):
    """Invalid curvature data (symmetry, Bianchi identity, or schema)."""


@lru_cache(maxsize=None)
def _incidence(n: int) -> np.ndarray:
    # T[i, j, a] = +1 if (i, j) is wedge pair a, -1 if (j, i) is.
    pairs = wedge_pairs(n)
    t = np.zeros((n, n, len(pairs)))
    for a, (i, j) in enumerate(pairs):
        t[i, j, a] = 1.0
        t[j, i, a] = -1.0
    t.setflags(write=False)
    return t


def four_index(matrix) -> np.ndarray:
    """Expand wedge-basis matrices (..., N2, N2) into rank-4 arrays (..., n, n, n, n)."""
    matrix = np.asarray(matrix, dtype=float)
    n2 = matrix.shape[-1]
    n = int(round((1 + np.sqrt(1 + 8 * n2)) / 2))
    if n_wedge(n) != n2 or matrix.shape[-2] != n2:
        raise CurvatureError(f"matrix shape {matrix.shape} is not a two-form matrix")
    t = _incidence(n)
    return np.einsum("ija,...ab,klb->...ijkl", t, matrix, t, optimize=True)


def wedge_matrix(r4) -> np.ndarray:
    """Inverse of :func:`four_index`: read off ``R_ijkl`` for i < j, k < l."""
    r4 = np.asarray(r4, dtype=float)
    n = r4.shape[-1]
    iu, ju = np.triu_indices(n, 1)
    return r4[..., iu[:, None], ju[:, None], iu[None, :], ju[None, :]]


def bianchi_residual(r4) -> np.ndarray:
    """Max over indices of ``|R_ijkl + R_iklj + R_iljk|``."""
    r4 = np.asarray(r4)
    cyc = r4 + np.einsum("...iklj->...ijkl", r4) + np.einsum("...iljk->...ijkl", r4)
    return np.abs(cyc).max(axis=(-4, -3, -2, -1))


def _bianchi_project_r4(r4) -> np.ndarray:
    b = (r4 + np.einsum("...iklj->...ijkl", r4) + np.einsum("...iljk->...ijkl", r4)) / 3.0
    return r4 - b


def project_matrices(matrices) -> np.ndarray:
    """Batch Bianchi projection on wedge-basis matrices (..., N2, N2)."""
    m = np.asarray(matrices, dtype=float)
    m = 0.5 * (m + np.swapaxes(m, -1, -2))
    return wedge_matrix(_bianchi_project_r4(four_index(m)))


@dataclass(frozen=True, eq=False)
class AlgebraicCurvature:
    """Curvature tensor on R^n stored as its matrix on two-forms."""

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        n = check_dim(self.n)
        m = np.array(self.matrix, dtype=float)
        if m.shape != (n_wedge(n), n_wedge(n)):
            raise CurvatureError(f"expected {n_wedge(n)}x{n_wedge(n)} matrix, got {m.shape}")
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        if np.abs(m - m.T).max(initial=0.0) > EXACT_TOL * scale:
            raise CurvatureError("curvature matrix is not symmetric")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "matrix", m)
        if bianchi_residual(self.tensor) > EXACT_TOL * scale:
            raise CurvatureError("first Bianchi identity violated; use bianchi_project")

    @classmethod
    def from_tensor(cls, r4) -> "AlgebraicCurvature":
        r4 = np.asarray(r4, dtype=float)
        return cls(r4.shape[0], wedge_matrix(r4))

    @cached_property
    def tensor(self) -> np.ndarray:
        t = four_index(self.matrix)
        t.setflags(write=False)
        return t

    def __call__(self, a, b, c, d) -> float:
        """Evaluate ``R(a, b, c, d)`` on vectors."""
        return float(np.einsum("ijkl,i,j,k,l->", self.tensor, a, b, c, d))

    def __add__(self, other: "AlgebraicCurvature") -> "AlgebraicCurvature":
        return AlgebraicCurvature(self.n, self.matrix + other.matrix)

    def __sub__(self, other: "AlgebraicCurvature") -> "AlgebraicCurvature":
        return AlgebraicCurvature(self.n, self.matrix - other.matrix)

    def __mul__(self, s: float) -> "AlgebraicCurvature":
        return AlgebraicCurvature(self.n, float(s) * self.matrix)

    __rmul__ = __mul__

    def __neg__(self) -> "AlgebraicCurvature":
        return AlgebraicCurvature(self.n, -self.matrix)

    def norm(self) -> float:
        """Frobenius norm of the four-index array."""
        return float(np.linalg.norm(self.tensor))

    def rotated(self, frame) -> "AlgebraicCurvature":
        """Components in the orthonormal basis given by the columns of ``frame``."""
        f = np.asarray(frame, dtype=float)
        check_frame(f, self.n, count=self.n)
        r = np.einsum("abcd,ai,bj,ck,dl->ijkl", self.tensor, f, f, f, f, optimize=True)
        return AlgebraicCurvature.from_tensor(r)

    @cached_property
    def second_kind(self) -> "SecondKindOperator":
        return induce_second_kind(self)


def bianchi_project(matrix) -> AlgebraicCurvature:
    """Orthogonal projection of a symmetric two-form matrix onto algebraic curvature tensors.

    Removes the totally antisymmetric part
    ``(R_ijkl + R_iklj + R_iljk) / 3``.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise CurvatureError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.T).max(initial=0.0) > EXACT_TOL * scale:
        raise CurvatureError("input matrix is not symmetric")
    r4 = four_index(0.5 * (m + m.T))
    return AlgebraicCurvature.from_tensor(_bianchi_project_r4(r4))


def zero(n: int) -> AlgebraicCurvature:
    return AlgebraicCurvature(n, np.zeros((n_wedge(n), n_wedge(n))))


def constant_curvature(n: int, kappa: float = 1.0) -> AlgebraicCurvature:
    return AlgebraicCurvature(n, kappa * np.eye(n_wedge(n)))


def random_matrices(n: int, rng: np.random.Generator, count: int | None = None, scale: float = 1.0):
    """Gaussian symmetric two-form matrices, Bianchi-projected."""
    n2 = n_wedge(n)
    shape = (n2, n2) if count is None else (count, n2, n2)
    g = rng.standard_normal(shape) * scale
    return project_matrices(g)


def random_curvature(n: int, seed, scale: float = 1.0) -> AlgebraicCurvature:
    """Deterministic random algebraic curvature tensor for a given seed."""
    n = check_dim(n)
    rng = np.random.default_rng(seed)
    return AlgebraicCurvature(n, random_matrices(n, rng, scale=scale))


# ---------------------------------------------------------------------------
# second-kind operator


def second_kind_kernel(r4) -> np.ndarray:
    """``K_ijkl = R(e_i (.) e_j, e_k (.) e_l) = 2 (R_iklj + R_ilkj)``."""
    r4 = np.asarray(r4)
    return 2.0 * (np.einsum("...iklj->...ijkl", r4) + np.einsum("...ilkj->...ijkl", r4))


def second_kind_matrices(r4, basis=None) -> np.ndarray:
    """Matrix of the second-kind form on ``basis`` (default: canonical S^2_0 basis).

    A symmetric B equals ``1/2 sum_ij B_ij e_i (.) e_j``, so the form is the
    kernel contracted with ``B_a / 2`` and ``B_b / 2``.
    """
    r4 = np.asarray(r4, dtype=float)
    if basis is None:
        basis = standard_basis_S20(r4.shape[-1])
    k = second_kind_kernel(r4)
    return 0.25 * np.einsum("aij,...ijkl,bkl->...ab", basis, k, basis, optimize=True)


def rbar_apply(r4, h) -> np.ndarray:
    """``Rbar(h)_ij = sum_kl R_iklj h_kl`` on a symmetric two-tensor."""
    return np.einsum("iklj,kl->ij", r4, h)


@dataclass(frozen=True, eq=False)
class SecondKindOperator:
    """Second-kind operator as an N x N matrix on the canonical basis of S^2_0."""

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m = 0.5 * (m + m.T)
        w, v = np.linalg.eigh(m)
        for arr in (m, w, v):
            arr.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", v)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def mean(self) -> float:
        return float(np.trace(self.matrix)) / self.size

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def eigentensors(self) -> np.ndarray:
        """Orthonormal eigentensors (N, n, n), ordered like ``eigenvalues``."""
        return np.einsum("ab,aij->bij", self.eigenvectors, standard_basis_S20(self.n))

    def form(self, phi, psi=None) -> float:
        """Evaluate the bilinear form on traceless symmetric tensors."""
        a = traceless_coords(phi)
        b = a if psi is None else traceless_coords(psi)
        return float(a @ self.matrix @ b)

    def __neg__(self) -> "SecondKindOperator":
        return SecondKindOperator(self.n, -self.matrix)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))


def induce_second_kind(r: AlgebraicCurvature) -> SecondKindOperator:
    return SecondKindOperator(r.n, second_kind_matrices(r.tensor))


def rbar_form(r: AlgebraicCurvature, phi, psi) -> float:
    """``<pi(Rbar(phi)), psi>``, the projected route to the same bilinear form."""
    return float(np.tensordot(project_traceless(rbar_apply(r.tensor, phi)), psi, axes=2))


# ---------------------------------------------------------------------------
# contractions


def ricci(r: AlgebraicCurvature) -> np.ndarray:
    """``Ric_ij = sum_k R_kikj``."""
    return np.einsum("kikj->ij", r.tensor)


def ricci_batch(r4) -> np.ndarray:
    return np.einsum("...kikj->...ij", r4)


def scalar(r: AlgebraicCurvature) -> float:
    return float(np.trace(ricci(r)))


def sectional(r: AlgebraicCurvature, i: int, j: int) -> float:
    if i == j:
        raise ValueError("sectional curvature needs two distinct indices")
    return float(r.tensor[i, j, i, j])


def sectional_plane(r: AlgebraicCurvature, u, v) -> float:
    """Sectional curvature of span{u, v} for arbitrary independent u, v."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    area = u @ u * (v @ v) - (u @ v) ** 2
    if area <= EXACT_TOL:
        raise ValueError("vectors are linearly dependent")
    return r(u, v, u, v) / area


# ---------------------------------------------------------------------------
# frames and isotropic curvature


def check_frame(frame, n: int, count: int | None = None, tol: float = 1e-10) -> np.ndarray:
    f = np.asarray(frame, dtype=float)
    if f.ndim != 2 or f.shape[0] != n:
        raise ValueError(f"frame must have shape ({n}, k), got {f.shape}")
    if count is not None and f.shape[1] != count:
        raise ValueError(f"expected a frame of {count} vectors, got {f.shape[1]}")
    if not 2 <= f.shape[1] <= n:
        raise ValueError("a frame needs between 2 and n vectors")
    if np.abs(f.T @ f - np.eye(f.shape[1])).max() > tol:
        raise ValueError("frame vectors are not orthonormal")
    return f


def frame_quadratic(r: AlgebraicCurvature, frame, lam: float) -> float:
    """``R_0202 + l^2 R_0303 + R_1212 + l^2 R_1313 - 2 l R_0123`` on a four-frame."""
    if not -1.0 <= lam <= 1.0:
        raise ValueError(f"lambda={lam} outside [-1, 1]")
    if r.n < 4:
        raise ValueError("four-frames need n >= 4")
    f = check_frame(frame, r.n, count=4)
    e = [f[:, k] for k in range(4)]
    return (
        r(e[0], e[2], e[0], e[2])
        + lam**2 * r(e[0], e[3], e[0], e[3])
        + r(e[1], e[2], e[1], e[2])
        + lam**2 * r(e[1], e[3], e[1], e[3])
        - 2.0 * lam * r(e[0], e[1], e[2], e[3])
    )


def isotropic_expression(r: AlgebraicCurvature, frame) -> float:
    """Isotropic curvature ``R_0202 + R_0303 + R_1212 + R_1313 - 2 R_0123`` of a four-frame."""
    return frame_quadratic(r, frame, 1.0)


def _wedge_vectors(a, b) -> np.ndarray:
    # Two-form coordinates of a ^ b for batches of vectors (..., n).
    n = a.shape[-1]
    iu, ju = np.triu_indices(n, 1)
    return a[..., iu] * b[..., ju] - a[..., ju] * b[..., iu]


def isotropic_batch(matrix, frames) -> np.ndarray:
    """Isotropic expression for a batch of frames (F, n, >=4) via ``R(a,b,c,d) = w_ab^T M w_cd``."""
    f = np.asarray(frames)
    e = [f[..., :, k] for k in range(4)]

    def quad(a, b, c, d):
        return np.einsum("...a,ab,...b->...", _wedge_vectors(a, b), matrix, _wedge_vectors(c, d))

    return (
        quad(e[0], e[2], e[0], e[2])
        + quad(e[0], e[3], e[0], e[3])
        + quad(e[1], e[2], e[1], e[2])
        + quad(e[1], e[3], e[1], e[3])
        - 2.0 * quad(e[0], e[1], e[2], e[3])
    )


def sectional_batch(matrix, frames) -> np.ndarray:
    f = np.asarray(frames)
    w = _wedge_vectors(f[..., :, 0], f[..., :, 1])
    return np.einsum("...a,ab,...b->...", w, matrix, w)


def random_frames(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrices, shape (count, n, n)."""
    f = ortho_group.rvs(n, size=count, random_state=rng)
    return f.reshape(count, n, n)


def _refine(objective, n: int, start: np.ndarray) -> tuple[float, np.ndarray]:
    iu = np.triu_indices(n, 1)

    def frame_of(x):
        a = np.zeros((n, n))
        a[iu] = x
        return start @ expm(a - a.T)

    res = minimize(lambda x: objective(frame_of(x)[None])[0], np.zeros(len(iu[0])), method="BFGS",
                   options={"gtol": 1e-12, "maxiter": 500})
    return float(res.fun), frame_of(res.x)


def sampled_minimum(r: AlgebraicCurvature, kind: str, rng: np.random.Generator,
                    frames: int = 2000, refine: int = 3,
                    refine_below: float | None = None) -> tuple[float, np.ndarray]:
    """Sampled minimum of the isotropic (``kind='isotropic'``) or sectional curvature.

    Haar frames plus BFGS refinement from the ``refine`` best samples. With
    ``refine_below`` set, refinement runs only when the raw minimum falls
    below it. The result is an upper estimate of the true minimum, never a
    certificate.
    """
    if kind == "isotropic":
        if r.n < 4:
            raise ValueError("isotropic curvature needs n >= 4")
        objective = lambda f: isotropic_batch(r.matrix, f)  # noqa: E731
    elif kind == "sectional":
        objective = lambda f: sectional_batch(r.matrix, f)  # noqa: E731
    else:
        raise ValueError(f"unknown kind {kind!r}")
    fr = random_frames(r.n, frames, rng)
    vals = objective(fr)
    order = np.argsort(vals)
    best, best_frame = float(vals[order[0]]), fr[order[0]]
    if refine_below is not None and best >= refine_below:
        return best, best_frame
    for idx in order[:refine]:
        v, f = _refine(objective, r.n, fr[idx])
        if v < best:
            best, best_frame = v, f
    return best, best_frame


@lru_cache(maxsize=None)
def _self_dual_bases() -> tuple[np.ndarray, np.ndarray]:
    # Two-form coordinates in order (01, 02, 03, 12, 13, 23).
    s = 1 / np.sqrt(2)
    plus = s * np.array([[1, 0, 0, 0, 0, 1], [0, 1, 0, 0, -1, 0], [0, 0, 1, 1, 0, 0]], float)
    minus = s * np.array([[1, 0, 0, 0, 0, -1], [0, 1, 0, 0, 1, 0], [0, 0, 1, -1, 0, 0]], float)
    return plus, minus


def isotropic_minimum_4d(r: AlgebraicCurvature) -> float:
    """Exact minimum of the isotropic expression in dimension four.

    For a four-frame the expression equals ``Q(w1) + Q(w2)`` with
    ``w1 = e0^e2 - e1^e3`` and ``w2 = e0^e3 + e1^e2`` (first Bianchi), an
    orthogonal pair of norm sqrt(2) in one half of the self-dual splitting.
    Its minimum is twice the smallest sum of two eigenvalues of the
    curvature operator compressed to either half.
    """
    if r.n != 4:
        raise ValueError("exact isotropic minimum is implemented for n = 4 only")
    out = []
    for b in _self_dual_bases():
        w = np.linalg.eigvalsh(b @ r.matrix @ b.T)
        out.append(2.0 * (w[0] + w[1]))
    return float(min(out))


# ---------------------------------------------------------------------------
# JSON I/O


def to_json(r: AlgebraicCurvature, **extra) -> dict:
    doc = {
        "schema": SCHEMA,
        "n": r.n,
        "basis": BASIS_TAG,
        "convention": CONVENTION,
        "matrix": r.matrix.tolist(),
    }
    if extra:
        doc["meta"] = extra
    return doc


_ALLOWED = {"schema", "n", "basis", "convention", "matrix", "meta"}


def from_json(doc: dict) -> AlgebraicCurvature:
    if not isinstance(doc, dict):
        raise CurvatureError("tensor document must be a JSON object")
    unknown = set(doc) - _ALLOWED
    if unknown:
        raise CurvatureError(f"unknown fields: {sorted(unknown)}")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise CurvatureError(f"unsupported schema {doc.get('schema')!r}")
    if doc.get("basis") != BASIS_TAG:
        raise CurvatureError(f"basis must be {BASIS_TAG!r}")
    if "n" not in doc or "matrix" not in doc:
        raise CurvatureError("fields 'n' and 'matrix' are required")
    try:
        m = np.array(doc["matrix"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise CurvatureError(f"matrix is not numeric: {exc}") from exc
    return AlgebraicCurvature(int(doc["n"]), m)


def save(r: AlgebraicCurvature, path, **extra) -> None:
    Path(path).write_text(json.dumps(to_json(r, **extra), indent=1) + "\n", encoding="utf-8")


def load(path) -> AlgebraicCurvature:
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CurvatureError(f"{p}: {exc}") from exc
    try:
        return from_json(doc)
    except CurvatureError as exc:
        raise CurvatureError(f"{p}: {exc}") from exc


def mean_eigenvalue_from_scalar(s: float, n: int) -> float:
    return s / (n * (n - 1))


__all__ = [
    "AlgebraicCurvature", "SecondKindOperator", "CurvatureError", "bianchi_project",
    "bianchi_residual", "constant_curvature", "zero", "random_curvature", "random_matrices",
    "induce_second_kind", "second_kind_matrices", "rbar_form", "ricci", "ricci_batch", "scalar",
    "sectional", "sectional_plane", "isotropic_expression", "frame_quadratic", "isotropic_batch",
    "sectional_batch", "random_frames", "sampled_minimum", "isotropic_minimum_4d", "check_frame",
    "four_index", "wedge_matrix", "to_json", "from_json", "save", "load", "n_traceless", "EIG_TOL",
]
