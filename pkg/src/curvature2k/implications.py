"""Pointwise certification of Ricci and isotropic-curvature lower bounds.

Each check evaluates a hypothesis margin (cone membership of the second-kind
operator) and a conclusion margin (curvature minus the claimed bound). A
claim is violated only when the hypothesis holds beyond tolerance and the
conclusion fails beyond tolerance.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .cones import CONE_TOL, ConeParams, cone_membership, pic_theta
from .curvature_ops import (
    AlgebraicCurvature,
    check_frame,
    isotropic_minimum_4d,
    ricci,
    sampled_minimum,
)
from .tensor_space import n_traceless, sym, traceless_diagonal

# Sampled isotropic minima are upper estimates; this slack absorbs sampling error.
SAMPLED_TOL = 1e-6


class Verdict(str, Enum):
    CERTIFIED = "certified"
    VIOLATED = "violated"
    HYPOTHESIS_NOT_MET = "hypothesis-not-met"


@dataclass(frozen=True)
class ImplicationReport:
    claim: str
    hypothesis_margin: float
    conclusion_margin: float
    verdict: Verdict
    detail: dict | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d


def judge(hyp: float, concl: float, hyp_tol: float = CONE_TOL, concl_tol: float = CONE_TOL) -> Verdict:
    if hyp < -hyp_tol:
        return Verdict.HYPOTHESIS_NOT_MET
    if concl < -concl_tol:
        # Boundary hypotheses (|hyp| <= tol) still count: claims are stated on closed cones.
        return Verdict.VIOLATED
    return Verdict.CERTIFIED


def ricci_bound(n: int, alpha: float, theta: float) -> float:
    """Coefficient c with ``Ric >= c * mean_eigenvalue * g`` on C(alpha, theta)."""
    big_n = n_traceless(n)
    if not 1 <= alpha < big_n:
        raise ValueError(f"alpha={alpha} outside [1, {big_n})")
    if alpha <= n:
        return (n - 1) / (alpha + 1) * (1 - alpha * theta)
    num = n * n - n * (alpha * theta + alpha - 1) + 2 * (alpha * theta - 1)
    return (n - 1) * num / (n * n + n - 2 * (alpha + 1))


def verify_prop_ricci(r: AlgebraicCurvature, alpha: float, theta: float,
                      tol: float = CONE_TOL) -> ImplicationReport:
    op = r.second_kind
    hyp = cone_membership(op, ConeParams(alpha, theta), tol).margin
    ric_min = float(np.linalg.eigvalsh(ricci(r))[0])
    bound = ricci_bound(r.n, alpha, theta) * op.mean
    concl = ric_min - bound
    return ImplicationReport("ricci", hyp, concl, judge(hyp, concl, tol, tol),
                             {"ricci_min": ric_min, "bound": bound, "alpha": alpha, "theta": theta})


def cylinder_tensors(n: int, frame=None, axis: int = 0) -> np.ndarray:
    """Orthonormal traceless tensors ``phi_1, ..., phi_n`` built around ``e_axis``.

    ``phi_1`` is the diagonal tensor ``((n-1) e_a (.) e_a - sum_p e_p (.) e_p) / (2 sqrt(n(n-1)))``
    and the rest are ``e_a (.) e_i / sqrt(2)`` for i != a.
    """
    f = np.eye(n) if frame is None else check_frame(frame, n, count=n)
    order = [axis] + [i for i in range(n) if i != axis]
    f = f[:, order]
    phi1 = traceless_diagonal(0, n)
    out = [f @ phi1 @ f.T]
    out += [sym(f[:, 0], f[:, i]) / np.sqrt(2.0) for i in range(1, n)]
    return np.array(out)


def cylinder_frame_identities(r: AlgebraicCurvature, axis: int = 0, frame=None):
    """Both sides of the two frame identities used for the Ricci bound.

    Returns ``(lhs1, rhs1, lhs2, rhs2)`` with
    ``lhs1 = R(phi_1, phi_1)``, ``rhs1 = 2 Ric_aa / (n-1) - mean``,
    ``lhs2 = sum_{i>=2} R(phi_i, phi_i)``, ``rhs2 = Ric_aa``.
    """
    n = r.n
    f = np.eye(n) if frame is None else check_frame(frame, n, count=n)
    op = r.second_kind
    phis = cylinder_tensors(n, f, axis)
    e = f[:, axis]
    ric_aa = float(e @ ricci(r) @ e)
    lhs1 = op.form(phis[0])
    rhs1 = 2.0 / (n - 1) * ric_aa - op.mean
    lhs2 = sum(op.form(p) for p in phis[1:])
    return lhs1, rhs1, lhs2, ric_aa


def cp2_tensors(frame) -> np.ndarray:
    """The three orthonormal traceless tensors adapted to a four-frame."""
    f = np.asarray(frame, dtype=float)
    e = [f[:, k] for k in range(4)]
    phi1 = 0.25 * (sym(e[0], e[0]) + sym(e[1], e[1]) - sym(e[2], e[2]) - sym(e[3], e[3]))
    phi2 = 0.5 * (sym(e[0], e[3]) - sym(e[1], e[2]))
    phi3 = 0.5 * (sym(e[0], e[2]) + sym(e[1], e[3]))
    return np.array([phi1, phi2, phi3])


def cp2_frame_identity(r: AlgebraicCurvature, frame=None) -> tuple[float, float]:
    """``sum_i R(phi_i, phi_i)`` against ``R_0202 + R_0303 + R_1212 + R_1313 - (R_0101 + R_2323)/2 - 3 R_0123``."""
    if r.n != 4:
        raise ValueError("the four-frame identity is implemented for n = 4 only")
    f = np.eye(4) if frame is None else check_frame(frame, 4, count=4)
    op = r.second_kind
    lhs = sum(op.form(p) for p in cp2_tensors(f))
    t = r.rotated(f).tensor
    rhs = (t[0, 2, 0, 2] + t[0, 3, 0, 3] + t[1, 2, 1, 2] + t[1, 3, 1, 3]
           - 0.5 * (t[0, 1, 0, 1] + t[2, 3, 2, 3]) - 3.0 * t[0, 1, 2, 3])
    return float(lhs), float(rhs)


def verify_prop_pic(r: AlgebraicCurvature, alpha: float, rng: np.random.Generator | None = None,
                    frames: int = 2000, tol: float = CONE_TOL,
                    always_refine: bool = False) -> ImplicationReport:
    """Nonnegative isotropic curvature under the four-dimensional pinching cone.

    The conclusion is the sampled minimum over ``frames`` Haar frames. Local
    refinement runs on any hit below ``-SAMPLED_TOL`` (or always, for
    sharpness probes). The exact minimum from the self-dual splitting is
    attached for reference but does not decide the verdict.
    """
    if r.n != 4:
        raise ValueError("isotropic-curvature check is four-dimensional")
    theta = pic_theta(alpha)
    rng = np.random.default_rng(0) if rng is None else rng
    hyp = cone_membership(r.second_kind, ConeParams(alpha, theta), tol).margin
    sampled, _ = sampled_minimum(r, "isotropic", rng, frames=frames,
                                 refine_below=None if always_refine else -SAMPLED_TOL)
    verdict = judge(hyp, sampled, tol, SAMPLED_TOL)
    return ImplicationReport("pic", hyp, sampled, verdict,
                             {"alpha": alpha, "theta": theta, "sampled_minimum": sampled,
                              "exact_minimum": isotropic_minimum_4d(r), "frames": frames})
