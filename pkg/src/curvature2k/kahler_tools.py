"""Kähler curvature: complex structures, the E+/E- splitting, and rigidity diagnostics.

Frames are J-adapted when their columns read ``(e_0..e_{m-1}, Je_0..Je_{m-1})``.
A curvature tensor is Kähler when ``R(X, Y, JZ, JW) = R(X, Y, Z, W)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .cones import CONE_TOL, ConeParams, b_malpha, cone_membership
from .curvature_ops import AlgebraicCurvature, check_frame, four_index
from .model_spaces import constant_hsc_tensor, standard_j
from .tensor_space import EXACT_TOL, n_wedge, sym, wedge_pairs

KAHLER_TOL = 1e-8
FLAT_TOL = 1e-7
HSC_TOL = 1e-6
HSC_SAMPLES = 500


@dataclass(frozen=True)
class ComplexStructure:
    j: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.j, dtype=float)
        if j.ndim != 2 or j.shape[0] != j.shape[1] or j.shape[0] % 2:
            raise ValueError("complex structure must be a square matrix of even size")
        n = j.shape[0]
        if np.abs(j @ j + np.eye(n)).max() > EXACT_TOL * 10:
            raise ValueError("J^2 != -Id")
        if np.abs(j.T @ j - np.eye(n)).max() > EXACT_TOL * 10:
            raise ValueError("J is not orthogonal")
        object.__setattr__(self, "j", j)

    @classmethod
    def standard(cls, m: int) -> "ComplexStructure":
        return cls(standard_j(m))

    @property
    def n(self) -> int:
        return self.j.shape[0]

    @property
    def m(self) -> int:
        return self.n // 2

    def adapted_frame(self, rng: np.random.Generator | None = None) -> np.ndarray:
        """A J-adapted orthonormal frame; random if ``rng`` is given, else built from e_0, e_1, ..."""
        n, m = self.n, self.m
        cols: list[np.ndarray] = []
        pool = rng.standard_normal((4 * n, n)) if rng is not None else np.eye(n)
        for v in pool:
            if len(cols) == 2 * m:
                break
            if cols:
                b = np.array(cols).T
                v = v - b @ (b.T @ v)
            nv = np.linalg.norm(v)
            if nv < 1e-8:
                continue
            v = v / nv
            cols += [v, self.j @ v]
        if len(cols) < 2 * m:  # pragma: no cover - pool always spans
            raise RuntimeError("could not complete a J-adapted frame")
        es, jes = cols[0::2], cols[1::2]
        return np.array(es + jes).T

    def is_adapted(self, frame, tol: float = 1e-10) -> bool:
        f = check_frame(frame, self.n, count=self.n, tol=tol)
        m = self.m
        return bool(np.abs(self.j @ f[:, :m] - f[:, m:]).max() <= tol)


def _as_structure(j) -> ComplexStructure:
    return j if isinstance(j, ComplexStructure) else ComplexStructure(j)


# ---------------------------------------------------------------------------
# bases of E- and E+


@dataclass(frozen=True)
class KahlerBases:
    minus_phi: np.ndarray
    minus_psi: np.ndarray
    eta: np.ndarray
    plus_phi: np.ndarray
    plus_psi: np.ndarray
    theta: np.ndarray

    @property
    def minus(self) -> np.ndarray:
        return np.concatenate([self.minus_phi, self.minus_psi, self.eta])

    @property
    def plus(self) -> np.ndarray:
        return np.concatenate([self.plus_phi, self.plus_psi, self.theta])

    @property
    def all(self) -> np.ndarray:
        return np.concatenate([self.minus, self.plus])


def build_kahler_bases(frame, j) -> KahlerBases:
    cs = _as_structure(j)
    if not cs.is_adapted(frame):
        raise ValueError("frame is not orthonormal and J-adapted")
    f = np.asarray(frame, dtype=float)
    n, m = cs.n, cs.m
    e = [f[:, i] for i in range(m)]
    je = [f[:, m + i] for i in range(m)]
    pairs = list(combinations(range(m), 2))
    empty = np.zeros((0, n, n))

    def stack(items):
        return np.array(items) if items else empty

    minus_phi = stack([0.5 * (sym(e[i], e[k]) + sym(je[i], je[k])) for i, k in pairs])
    minus_psi = stack([0.5 * (sym(e[i], je[k]) - sym(je[i], e[k])) for i, k in pairs])
    plus_phi = stack([0.5 * (sym(e[i], e[k]) - sym(je[i], je[k])) for i, k in pairs])
    plus_psi = stack([0.5 * (sym(e[i], je[k]) + sym(je[i], e[k])) for i, k in pairs])
    eta = []
    for k in range(1, m):
        s = 1 / np.sqrt(8 * k * (k + 1))
        t = k * s * (sym(e[k], e[k]) + sym(je[k], je[k]))
        t -= s * sum(sym(e[i], e[i]) + sym(je[i], je[i]) for i in range(k))
        eta.append(t)
    theta = [(sym(e[i], e[i]) - sym(je[i], je[i])) / (2 * np.sqrt(2)) for i in range(m)]
    theta += [sym(e[i], je[i]) / np.sqrt(2) for i in range(m)]
    return KahlerBases(minus_phi, minus_psi, stack(eta), plus_phi, plus_psi, np.array(theta))


# ---------------------------------------------------------------------------
# Kähler tensors


def constant_hsc(m: int, c: float = 4.0) -> tuple[AlgebraicCurvature, ComplexStructure]:
    """Constant holomorphic sectional curvature ``c`` on C^m with the standard J."""
    if m < 1:
        raise ValueError("m must be >= 1")
    cs = ComplexStructure.standard(m)
    return AlgebraicCurvature.from_tensor(constant_hsc_tensor(cs.j, c)), cs


def kahler_residual(r: AlgebraicCurvature, j) -> float:
    """``max |R(X, Y, JZ, JW) - R(X, Y, Z, W)|`` over basis vectors."""
    jm = _as_structure(j).j
    t = r.tensor
    rj = np.einsum("ijab,ak,bl->ijkl", t, jm, jm)
    return float(np.abs(rj - t).max())


@lru_cache(maxsize=None)
def _kahler_subspace(m: int) -> np.ndarray:
    """Orthonormal basis (Frobenius on wedge matrices) of Kähler curvature matrices for the standard J."""
    n = 2 * m
    jm = standard_j(m)
    pairs = wedge_pairs(n)
    # J acting on two-forms: e_a ^ e_b -> Je_a ^ Je_b, as a matrix on lex coordinates.
    c = np.zeros((len(pairs), len(pairs)))
    for col, (a, b) in enumerate(pairs):
        w = np.outer(jm[:, a], jm[:, b]) - np.outer(jm[:, b], jm[:, a])
        c[:, col] = [w[i, k] for i, k in pairs]
    proj = 0.5 * (np.eye(len(pairs)) + c)
    w_, v_ = np.linalg.eigh(proj)
    u = v_[:, w_ > 0.5]  # image of the projection, dim m^2
    k = u.shape[1]
    iu = np.triu_indices(k)
    gens = []
    for a, b in zip(*iu):
        x = np.zeros((k, k))
        x[a, b] = x[b, a] = 1.0 if a == b else 1 / np.sqrt(2)
        gens.append(u @ x @ u.T)
    gens = np.array(gens)
    # Bianchi residual is linear in the matrix; its nullspace is the Kähler curvature space.
    r4 = four_index(gens)
    res = r4 + np.einsum("...iklj->...ijkl", r4) + np.einsum("...iljk->...ijkl", r4)
    a_mat = res.reshape(len(gens), -1).T
    _, s, vt = np.linalg.svd(a_mat)
    rank = int(np.sum(s > 1e-10 * s[0]))
    null = vt[rank:]
    basis = np.einsum("kg,gab->kab", null, gens)
    basis.setflags(write=False)
    return basis


def kahler_dimension(m: int) -> int:
    return len(_kahler_subspace(m))


def project_kahler(r: AlgebraicCurvature, j=None) -> AlgebraicCurvature:
    """Orthogonal projection onto Kähler curvature tensors for ``j`` (standard J by default).

    A general J is handled by conjugating into the standard form.
    """
    m = r.n // 2
    if r.n % 2:
        raise ValueError("Kähler tensors need even dimension")
    basis = _kahler_subspace(m)
    if j is None:
        coords = np.tensordot(basis, r.matrix, axes=2)
        return AlgebraicCurvature(r.n, np.tensordot(coords, basis, axes=1))
    cs = _as_structure(j)
    f = cs.adapted_frame()
    std = project_kahler(r.rotated(f))
    return std.rotated(f.T)


def random_kahler(m: int, seed, scale: float = 1.0) -> tuple[AlgebraicCurvature, ComplexStructure]:
    """Gaussian element of the Kähler curvature space for the standard J."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    basis = _kahler_subspace(m)
    coords = scale * rng.standard_normal(len(basis))
    return AlgebraicCurvature(2 * m, np.tensordot(coords, basis, axes=1)), ComplexStructure.standard(m)


def holomorphic_sectional(r: AlgebraicCurvature, j, x) -> float:
    jm = _as_structure(j).j
    x = np.asarray(x, dtype=float)
    jx = jm @ x
    return r(x, jx, x, jx) / float(x @ x) ** 2


def hsc_samples(r: AlgebraicCurvature, j, rng: np.random.Generator, count: int = HSC_SAMPLES) -> np.ndarray:
    jm = _as_structure(j).j
    x = rng.standard_normal((count, r.n))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    jx = x @ jm.T
    return np.einsum("ijkl,si,sj,sk,sl->s", r.tensor, x, jx, x, jx, optimize=True)


def hsc_variance(r: AlgebraicCurvature, j, rng: np.random.Generator | None = None,
                 count: int = HSC_SAMPLES) -> float:
    rng = np.random.default_rng(0) if rng is None else rng
    return float(np.var(hsc_samples(r, j, rng, count)))


# ---------------------------------------------------------------------------
# identities


@dataclass(frozen=True)
class TraceResiduals:
    pair_sum: float      # E- pair sums against -2 R(e_i, Je_i, e_j, Je_j)
    theta_diag: float    # R(theta_i), R(theta_{m+i}) against R(e_i, Je_i, e_i, Je_i)
    plus_trace: float    # E+ trace against 2m(2m-1) mean
    minus_trace: float   # E- trace against -(m-1)(2m-1) mean

    def max(self) -> float:
        return max(self.pair_sum, self.theta_diag, self.plus_trace, self.minus_trace)


def _require_kahler(r: AlgebraicCurvature, j) -> None:
    res = kahler_residual(r, j)
    if res > KAHLER_TOL * max(1.0, r.norm()):
        raise ValueError(f"tensor is not Kähler for this J (residual {res:.3e})")


def trace_identities(r: AlgebraicCurvature, j, frame=None) -> TraceResiduals:
    cs = _as_structure(j)
    _require_kahler(r, cs)
    f = cs.adapted_frame() if frame is None else np.asarray(frame, dtype=float)
    kb = build_kahler_bases(f, cs)
    op = r.second_kind
    m = cs.m
    e, je = f[:, :m], f[:, m:]
    form = lambda t: op.form(t)  # noqa: E731
    hol = np.array([r(e[:, i], je[:, i], e[:, i], je[:, i]) for i in range(m)])
    pair = 0.0
    for k, (a, b) in enumerate(combinations(range(m), 2)):
        lhs = form(kb.minus_phi[k]) + form(kb.minus_psi[k])
        pair = max(pair, abs(lhs + 2 * r(e[:, a], je[:, a], e[:, b], je[:, b])))
    th = np.array([form(t) for t in kb.theta])
    theta_diag = float(max(np.abs(th[:m] - hol).max(), np.abs(th[m:] - hol).max()))
    plus = sum(form(t) for t in kb.plus)
    minus = sum(form(t) for t in kb.minus)
    lam = op.mean
    return TraceResiduals(float(pair), theta_diag, abs(plus - 2 * m * (2 * m - 1) * lam),
                          abs(minus + (m - 1) * (2 * m - 1) * lam))


def xi_identity(r: AlgebraicCurvature, j, frame, a: int, b: int) -> tuple[float, float]:
    """``R(xi, xi)`` for ``xi = (e_a(.)e_a + Je_a(.)Je_a - e_b(.)e_b - Je_b(.)Je_b)/4`` and its curvature form."""
    cs = _as_structure(j)
    f = np.asarray(frame, dtype=float)
    m = cs.m
    ea, eb, ja, jb = f[:, a], f[:, b], f[:, m + a], f[:, m + b]
    xi = 0.25 * (sym(ea, ea) + sym(ja, ja) - sym(eb, eb) - sym(jb, jb))
    lhs = r.second_kind.form(xi)
    rhs = -0.5 * r(ea, ja, ea, ja) - 0.5 * r(eb, jb, eb, jb) + r(ea, ja, eb, jb)
    return lhs, rhs


# ---------------------------------------------------------------------------
# rigidity diagnostic


@dataclass(frozen=True)
class KahlerDiagnostic:
    m: int
    alpha: float
    theta: float
    threshold: float
    plus_margin: float
    minus_margin: float
    case: str
    norm: float
    hsc_variance: float
    hsc_residual: float
    passed: bool

    @property
    def member_sign(self) -> int:
        if self.plus_margin >= -CONE_TOL:
            return 1
        if self.minus_margin >= -CONE_TOL:
            return -1
        return 0

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["member_sign"] = self.member_sign
        return d


def kahler_cone_diagnostic(r: AlgebraicCurvature, j, alpha: float, theta: float,
                           rng: np.random.Generator | None = None, tol: float = CONE_TOL,
                           frames: int = 4) -> KahlerDiagnostic:
    """Flatness below the CP^m threshold, constant holomorphic sectional curvature on it.

    ``case`` is one of ``'outside'``, ``'below'`` (theta under the threshold;
    the tensor must vanish), ``'boundary'`` (theta on the threshold with
    alpha != m^2-1; holomorphic sectional curvature must be constant),
    ``'excluded'`` (alpha = m^2-1 on the threshold; no claim), or ``'above'``.
    """
    cs = _as_structure(j)
    m = cs.m
    if m < 2:
        raise ValueError("diagnostic needs m >= 2")
    _require_kahler(r, cs)
    thr = b_malpha(m, alpha)
    params = ConeParams(alpha, theta)
    op = r.second_kind
    plus = cone_membership(op, params, tol).margin
    minus = cone_membership(-op, params, tol).margin
    rng = np.random.default_rng(0) if rng is None else rng
    var = hsc_variance(r, cs, rng)
    norm = r.norm()
    sign = 1 if plus >= -tol else (-1 if minus >= -tol else 0)
    hsc_res = 0.0
    if sign == 0:
        case, passed = "outside", True
    elif theta < thr - tol:
        case, passed = "below", norm <= FLAT_TOL
    elif abs(theta - thr) <= tol and not np.isclose(alpha, m * m - 1):
        case = "boundary"
        # the equality chain forces R(e, Je, e, Je) = 2(2m-1)/(m+1) * mean in every adapted frame
        target = 2 * (2 * m - 1) / (m + 1) * op.mean
        for _ in range(frames):
            f = cs.adapted_frame(rng)
            e, je = f[:, :m], f[:, m:]
            for i in range(m):
                hsc_res = max(hsc_res, abs(r(e[:, i], je[:, i], e[:, i], je[:, i]) - target))
        passed = var <= HSC_TOL and hsc_res <= HSC_TOL * max(1.0, abs(target))
    elif abs(theta - thr) <= tol:
        case, passed = "excluded", True
    else:
        case, passed = "above", True
    return KahlerDiagnostic(m, alpha, theta, thr, plus, minus, case, norm, var, hsc_res, bool(passed))


__all__ = [
    "ComplexStructure", "KahlerBases", "build_kahler_bases", "constant_hsc", "kahler_residual",
    "project_kahler", "random_kahler", "kahler_dimension", "holomorphic_sectional", "hsc_variance",
    "TraceResiduals", "trace_identities", "xi_identity", "KahlerDiagnostic", "kahler_cone_diagnostic",
    "n_wedge",
]
