"""Model curvature tensors with known second-kind spectra.

Products are assembled as block sums: factor curvatures placed on disjoint
index sets with all mixed components zero. Complex projective factors use
constant holomorphic sectional curvature ``c`` (default 4) and the standard
complex structure ``J e_i = e_{m+i}`` on the frame ``(e_1..e_m, Je_1..Je_m)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .cones import b_malpha, theta_cylinder
from .curvature_ops import AlgebraicCurvature, constant_curvature
from .tensor_space import MAX_DIM, n_traceless

KINDS = ("sphere", "cylinder", "sphere_product", "cp_fubini_study", "cp_product", "flat")
CLUSTER_GAP = 1e-7


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    n: int | None = None
    m: int | None = None
    k: int | None = None
    kappa1: float = 1.0
    kappa2: float = 1.0
    c: float = 4.0

    def __post_init__(self):
        kind = self.kind
        if kind not in KINDS:
            raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")
        if kind in ("cp_fubini_study", "cp_product"):
            if self.m is None or self.m < (1 if kind == "cp_fubini_study" else 2):
                raise ValueError(f"{kind} needs m >= {1 if kind == 'cp_fubini_study' else 2}")
            if self.n is not None and self.n != 2 * self.m:
                raise ValueError("n must equal 2m for complex models")
            object.__setattr__(self, "n", 2 * self.m)
            if kind == "cp_product" and (self.k is None or not 1 <= self.k <= self.m - 1):
                raise ValueError("cp_product needs 1 <= k <= m-1")
        else:
            if self.n is None or self.n < 2:
                raise ValueError(f"{kind} needs n >= 2")
            if kind == "cylinder" and self.n < 3:
                raise ValueError("cylinder needs n >= 3")
            if kind == "sphere_product":
                if self.k is None or not 2 <= self.k <= self.n - 2:
                    raise ValueError("sphere_product needs 2 <= k <= n-2")
                if self.kappa1 <= 0 or self.kappa2 <= 0:
                    raise ValueError("sphere curvatures must be positive")
        if self.n > MAX_DIM:
            raise ValueError(f"n={self.n} exceeds the dimension cap {MAX_DIM}")


def sphere(n: int, kappa: float = 1.0) -> ModelSpec:
    return ModelSpec("sphere", n=n, kappa1=kappa)


def cylinder(n: int) -> ModelSpec:
    return ModelSpec("cylinder", n=n)


def sphere_product(n: int, k: int, kappa1: float = 1.0, kappa2: float = 1.0) -> ModelSpec:
    return ModelSpec("sphere_product", n=n, k=k, kappa1=kappa1, kappa2=kappa2)


def cp(m: int, c: float = 4.0) -> ModelSpec:
    return ModelSpec("cp_fubini_study", m=m, c=c)


def cp_product(k: int, m: int, c: float = 4.0) -> ModelSpec:
    return ModelSpec("cp_product", m=m, k=k, c=c)


def flat(n: int) -> ModelSpec:
    return ModelSpec("flat", n=n)


def einstein_sphere_product(n: int, k: int) -> ModelSpec:
    """Einstein product S^k x S^{n-k}, normalized to scalar curvature n(n-1)."""
    if not 2 <= k <= n - 2:
        raise ValueError("Einstein normalization needs 2 <= k <= n-2")
    return sphere_product(n, k, (n - 1) / (k - 1), (n - 1) / (n - k - 1))


def standard_j(m: int) -> np.ndarray:
    j = np.zeros((2 * m, 2 * m))
    j[m:, :m] = np.eye(m)
    j[:m, m:] = -np.eye(m)
    return j


def constant_hsc_tensor(j: np.ndarray, c: float) -> np.ndarray:
    """Four-index tensor of constant holomorphic sectional curvature ``c`` for complex structure ``j``.

    ``R(X,Y,Z,W) = c/4 [<X,Z><Y,W> - <X,W><Y,Z> + <X,JZ><Y,JW> - <X,JW><Y,JZ> + 2<X,JY><Z,JW>]``
    """
    g = np.eye(j.shape[0])
    # <X, J Z> for basis vectors is j[x, z].
    return 0.25 * c * (
        np.einsum("ik,jl->ijkl", g, g)
        - np.einsum("il,jk->ijkl", g, g)
        + np.einsum("ik,jl->ijkl", j, j)
        - np.einsum("il,jk->ijkl", j, j)
        + 2 * np.einsum("ij,kl->ijkl", j, j)
    )


def embed(parts: list[tuple[np.ndarray, list[int]]], n: int) -> np.ndarray:
    """Block-sum factor tensors, each placed on its own index list."""
    out = np.zeros((n, n, n, n))
    for r4, idx in parts:
        ix = np.ix_(idx, idx, idx, idx)
        out[ix] += r4
    return out


def _sphere_r4(n: int, kappa: float) -> np.ndarray:
    return np.array(constant_curvature(n, kappa).tensor)


def build(spec: ModelSpec) -> AlgebraicCurvature:
    kind, n = spec.kind, spec.n
    if kind == "flat":
        return constant_curvature(n, 0.0)
    if kind == "sphere":
        return constant_curvature(n, spec.kappa1)
    if kind == "cylinder":
        r4 = embed([(_sphere_r4(n - 1, 1.0), list(range(n - 1)))], n)
        return AlgebraicCurvature.from_tensor(r4)
    if kind == "sphere_product":
        k = spec.k
        r4 = embed([(_sphere_r4(k, spec.kappa1), list(range(k))),
                    (_sphere_r4(n - k, spec.kappa2), list(range(k, n)))], n)
        return AlgebraicCurvature.from_tensor(r4)
    m = spec.m
    if kind == "cp_fubini_study":
        return AlgebraicCurvature.from_tensor(constant_hsc_tensor(standard_j(m), spec.c))
    # cp_product: CP^k on complex indices 0..k-1, CP^{m-k} on k..m-1.
    k = spec.k
    parts = []
    for lo, hi in ((0, k), (k, m)):
        idx = list(range(lo, hi)) + list(range(m + lo, m + hi))
        parts.append((constant_hsc_tensor(standard_j(hi - lo), spec.c), idx))
    return AlgebraicCurvature.from_tensor(embed(parts, 2 * m))


def complex_structure(spec: ModelSpec) -> np.ndarray | None:
    if spec.kind in ("cp_fubini_study", "cp_product"):
        return standard_j(spec.m)
    return None


def expected_spectrum(spec: ModelSpec) -> list[tuple[float, int]]:
    """Closed-form second-kind spectrum as (eigenvalue, multiplicity), ascending, merged."""
    kind, n = spec.kind, spec.n
    big_n = n_traceless(n)
    if kind == "flat":
        raw = [(0.0, big_n)]
    elif kind == "sphere":
        raw = [(spec.kappa1, big_n)]
    elif kind == "cylinder":
        raw = [(-(n - 2) / n, 1), (0.0, n - 1), (1.0, (n - 2) * (n + 1) // 2)]
    elif kind == "sphere_product":
        k, k1, k2 = spec.k, spec.kappa1, spec.kappa2
        raw = [
            (-(k * (n - k - 1) * k2 + (n - k) * (k - 1) * k1) / n, 1),
            (0.0, k * (n - k)),
            (k1, (k - 1) * (k + 2) // 2),
            (k2, (n - k - 1) * (n - k + 2) // 2),
        ]
    elif kind == "cp_fubini_study":
        m, s = spec.m, spec.c / 4
        raw = [(-2.0 * s, m * m - 1), (4.0 * s, m * (m + 1))]
    elif kind == "cp_product":
        m, k, s = spec.m, spec.k, spec.c / 4
        raw = [
            ((-2.0 - 4.0 * k * (m - k) / m) * s, 1),
            (-2.0 * s, k * k + (m - k) ** 2 - 2),
            (0.0, 4 * k * (m - k)),
            (4.0 * s, k * (k + 1) + (m - k) * (m - k + 1)),
        ]
    else:  # pragma: no cover - guarded by ModelSpec
        raise ValueError(f"no printed spectrum for kind {kind!r}")
    merged: dict[float, int] = {}
    for val, mult in raw:
        if mult <= 0:
            continue
        key = next((v for v in merged if abs(v - val) <= CLUSTER_GAP), val)
        merged[key] = merged.get(key, 0) + mult
    out = sorted(merged.items())
    assert sum(m for _, m in out) == big_n
    return out


def cluster_spectrum(eigs, gap: float = CLUSTER_GAP) -> list[tuple[float, int]]:
    """Group ascending eigenvalues whose consecutive gaps are <= ``gap``."""
    eigs = np.sort(np.asarray(eigs, dtype=float))
    groups: list[list[float]] = [[eigs[0]]]
    for x in eigs[1:]:
        if x - groups[-1][-1] <= gap:
            groups[-1].append(x)
        else:
            groups.append([x])
    return [(float(np.mean(g)), len(g)) for g in groups]


def spectrum_mismatch(computed, expected) -> float:
    """Max eigenvalue error if multiplicities match, ``inf`` otherwise."""
    if len(computed) != len(expected) or any(a[1] != b[1] for a, b in zip(computed, expected)):
        return float("inf")
    return max(abs(a[0] - b[0]) for a, b in zip(computed, expected))


@dataclass(frozen=True)
class BoundaryCertificate:
    alpha: float
    theta: float
    label: str = field(default="")


def boundary_certificates(spec: ModelSpec, alphas=None) -> list[BoundaryCertificate]:
    """Printed (alpha, theta) pairs on whose cone boundary the model sits."""
    n = spec.n
    big_n = n_traceless(n)
    if spec.kind == "cylinder":
        alphas = alphas if alphas is not None else [1.0, float(n), (n + 2) / 2, big_n - 0.5]
        return [BoundaryCertificate(a, theta_cylinder(n, a), "cylinder") for a in alphas]
    if spec.kind == "cp_fubini_study" and spec.m >= 2 and spec.c > 0:
        top = (2 * spec.m - 1) * (spec.m + 1)
        alphas = alphas if alphas is not None else [1.0, spec.m**2 - 1, (n + 2) / 2, top - 0.5]
        return [BoundaryCertificate(a, b_malpha(spec.m, a), "cp") for a in alphas]
    if spec.kind == "cp_product" and spec.c > 0:
        m = spec.m
        return [BoundaryCertificate(m * m - 1, (2 * m - 1) / (m + 1), "cp_product")]
    if spec.kind == "sphere_product" and np.isclose((spec.k - 1) * spec.kappa1, (n - spec.k - 1) * spec.kappa2):
        return [BoundaryCertificate((n + 2) / 2, 2 * (n - 1) / (n + 2), "einstein")]
    return []


def parse_value(text: str):
    """Parse ``'10/3'`` or ``'2.5'`` into a float."""
    return float(Fraction(text)) if "/" in text else float(text)
