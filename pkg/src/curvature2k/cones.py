"""Eigenvalue pinching cones C(alpha, theta) and their closed-form thresholds.

An operator with ascending eigenvalues l_1 <= ... <= l_N lies in C(alpha, theta) when

    (l_1 + ... + l_alpha) / alpha >= -theta * mean(l),

where a fractional alpha adds ``(alpha - floor(alpha)) * l_{floor(alpha)+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .tensor_space import EIG_TOL, n_traceless

CONE_TOL = 1e-9


def partial_sum(values, x: float, check_sorted: bool = True) -> float:
    """``a_1 + ... + a_[x] + (x - [x]) a_{[x]+1}`` for ascending ``values``."""
    a = np.asarray(values, dtype=float)
    if a.ndim != 1:
        raise ValueError("values must be one-dimensional")
    if not 1 <= x <= len(a):
        raise ValueError(f"x={x} outside [1, {len(a)}]")
    if check_sorted and np.any(np.diff(a) < 0):
        raise ValueError("values must be sorted ascending")
    k = math.floor(x)
    s = float(a[:k].sum())
    if k < len(a):
        s += (x - k) * float(a[k])
    return s


def partial_sums(eigs, x: float) -> np.ndarray:
    """Vectorized :func:`partial_sum` over the last axis of already-sorted arrays."""
    eigs = np.asarray(eigs, dtype=float)
    k = math.floor(x)
    s = eigs[..., :k].sum(axis=-1)
    if k < eigs.shape[-1]:
        s = s + (x - k) * eigs[..., k]
    return s


def cone_margins(eigs, alpha: float, theta: float) -> np.ndarray:
    """``partial_sum(eigs, alpha) / alpha + theta * mean(eigs)`` over the last axis."""
    eigs = np.asarray(eigs, dtype=float)
    return partial_sums(eigs, alpha) / alpha + theta * eigs.mean(axis=-1)


@dataclass(frozen=True)
class ConeParams:
    alpha: float
    theta: float

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValueError(f"alpha={self.alpha} must be >= 1")
        if not self.theta > -1:
            raise ValueError(f"theta={self.theta} must be > -1")

    def check(self, n: int) -> "ConeParams":
        big_n = n_traceless(n)
        if not self.alpha < big_n:
            raise ValueError(f"alpha={self.alpha} must be < N={big_n} for n={n}")
        return self


class Membership(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def classify(margin: float, tol: float = CONE_TOL) -> Membership:
    if margin > tol:
        return Membership.INTERIOR
    if margin < -tol:
        return Membership.OUTSIDE
    return Membership.BOUNDARY


@dataclass(frozen=True)
class ConeVerdict:
    margin: float
    membership: Membership
    tol: float = CONE_TOL

    @property
    def member(self) -> bool:
        return self.membership is not Membership.OUTSIDE


def cone_membership(op, params: ConeParams, tol: float = CONE_TOL) -> ConeVerdict:
    """Classify a second-kind operator (anything with ``.n`` and ascending ``.eigenvalues``)."""
    params.check(op.n)
    margin = float(cone_margins(op.eigenvalues, params.alpha, params.theta))
    return ConeVerdict(margin, classify(margin, tol), tol)


def boundary_theta(eigs, alpha: float) -> float:
    """The theta putting ``eigs`` exactly on the boundary of C(alpha, theta); needs mean > 0."""
    eigs = np.asarray(eigs, dtype=float)
    mean = eigs.mean()
    if mean <= 0:
        raise ValueError("boundary theta is defined only for positive mean eigenvalue")
    return float(-partial_sum(eigs, alpha) / (alpha * mean))


# ---------------------------------------------------------------------------
# thresholds


def theta_cylinder(n: int, alpha: float) -> float:
    """Threshold on which the product S^{n-1} x S^1 sits, for 1 <= alpha < N."""
    if not 1 <= alpha < n_traceless(n):
        raise ValueError(f"alpha={alpha} outside [1, {n_traceless(n)}) for n={n}")
    if alpha <= n:
        return 1.0 / alpha
    return 1.0 / alpha + n * (n - alpha) / ((n - 2) * alpha)


def a_np(n: int, p: int) -> float:
    """Betti-number vanishing threshold for (n+2)/2-cones on p-forms."""
    if n < 5:
        raise ValueError("defined for n >= 5")
    if not 2 <= p <= n / 2:
        raise ValueError(f"p={p} outside [2, n/2] for n={n}")
    num = 2 * (n - 1) * (n * p + n - p * p)
    den = 2 * (n - 1) * (n - 2 * p) * (n - p + 1) + (n - p) * (n + 2) * (n - p + 2)
    return num / den


def a_n2(n: int) -> float:
    """Closed form of ``a_np(n, 2)``."""
    return 2 * (n - 1) * (3 * n - 4) / (3 * n**3 - 12 * n**2 + 14 * n - 8)


def b_malpha(m: int, alpha: float) -> float:
    """Threshold on which complex projective space CP^m sits (c = 4)."""
    if m < 2:
        raise ValueError("defined for m >= 2")
    top = (2 * m - 1) * (m + 1)
    if not 1 <= alpha < top:
        raise ValueError(f"alpha={alpha} outside [1, {top}) for m={m}")
    base = (2 * m - 1) / (m + 1)
    if alpha <= m * m - 1:
        return base
    return base * (3 * (m * m - 1) - 2 * alpha) / alpha


def pic_theta(alpha: float) -> float:
    """Four-dimensional isotropic-curvature threshold: 1 up to alpha = 3, then 9/alpha - 2."""
    if not 1 <= alpha < 9:
        raise ValueError(f"alpha={alpha} outside [1, 9)")
    return 1.0 if alpha <= 3 else 9.0 / alpha - 2.0


def cone_monotonicity_check(op, alpha1: float, alpha2: float, theta1: float, theta2: float,
                            tol: float = CONE_TOL) -> bool:
    """False only if membership at (alpha1, theta1) fails to carry over to (alpha2, theta2)."""
    if alpha1 > alpha2 or theta1 > theta2:
        raise ValueError("need alpha1 <= alpha2 and theta1 <= theta2")
    first = cone_membership(op, ConeParams(alpha1, theta1), tol)
    if not first.member:
        return True
    return cone_membership(op, ConeParams(alpha2, theta2), tol).member


__all__ = [
    "partial_sum", "cone_margins", "ConeParams", "ConeVerdict", "Membership", "cone_membership",
    "theta_cylinder", "a_np", "b_malpha", "pic_theta", "cone_monotonicity_check", "EIG_TOL",
]
