"""Seeded verification and falsification campaigns over conditional claims.

Every claim pairs a hypothesis margin (a cone margin, or +inf when the claim
is unconditional) with a conclusion margin. A sample violates the claim when
the hypothesis margin is >= -tol and the conclusion margin is < -conclusion_tol.

Samples are independent: sample ``i`` of claim ``c`` draws from
``default_rng([seed, crc32(c), i])``. Even indices use the uniform generator;
odd indices use the biased generator, which shifts the sample onto the claim's
cone boundary (plus a small inward jitter on every other biased sample).
"""

from __future__ import annotations

import json
import math
import time
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import bochner_forms as bf
from . import implications as imp
from . import kahler_tools as kt
from .cones import CONE_TOL, a_np, b_malpha, cone_margins, partial_sum, pic_theta, theta_cylinder
from .curvature_ops import (
    AlgebraicCurvature,
    bianchi_project,
    constant_curvature,
    random_frames,
    random_matrices,
    ricci,
    sampled_minimum,
    save,
    sectional_batch,
)
from .tensor_space import EIG_TOL, n_traceless

FORMAT_VERSION = "curvature2k-report/1"
# Seed shipped with the planted-control check; the miner must flag it within 1000 samples.
PLANTED_SEED = 7
SHIFT_JITTER = 0.05


@dataclass(frozen=True)
class Claim:
    id: str
    description: str
    valid: Callable[[int], bool]
    params: Callable[[int, np.random.Generator], dict]
    hypothesis: Callable[[AlgebraicCurvature, dict], float]
    conclusion: Callable[[AlgebraicCurvature, dict, np.random.Generator], float]
    cone: Callable[[int, dict], tuple[float, float]] | None = None
    conclusion_tol: float = CONE_TOL
    planted: bool = False
    kahler: bool = False


# ---------------------------------------------------------------------------
# claim definitions


def _margin(r, alpha, theta):
    return float(cone_margins(r.second_kind.eigenvalues, alpha, theta))


def _alpha(n: int, rng) -> float:
    big_n = n_traceless(n)
    if rng.random() < 0.25:
        return float(rng.integers(1, big_n))
    return float(rng.uniform(1.0, big_n))


def _ricci_params(n, rng):
    a = _alpha(n, rng)
    th = theta_cylinder(n, a) if rng.random() < 0.5 else float(rng.uniform(-0.5, 2.0))
    return {"alpha": a, "theta": th}


def _ricci_conclusion(r, p, rng):
    low = float(np.linalg.eigvalsh(ricci(r))[0])
    return low - imp.ricci_bound(r.n, p["alpha"], p["theta"]) * r.second_kind.mean


def _pic_params(n, rng):
    a = float(rng.uniform(1.0, 9.0)) if rng.random() < 0.75 else float(rng.integers(1, 9))
    return {"alpha": a, "theta": pic_theta(a)}


def _pic_conclusion(r, p, rng):
    v, _ = sampled_minimum(r, "isotropic", rng, frames=2000, refine_below=-imp.SAMPLED_TOL)
    return v


def _pricci_params(n, rng):
    p = int(rng.integers(1, n // 2 + 1))
    return {"p": p, "alpha": (n - 1) * p / 2, "theta": float(rng.uniform(-0.5, 2.0))}


def _pricci_conclusion(r, p, rng):
    n, k = r.n, p["p"]
    low = float(np.sum(np.linalg.eigvalsh(ricci(r))[:k]))
    return low - bf.p_ricci_bound(n, k, p["theta"]) * r.second_kind.mean


def _qbound_params(n, rng):
    return {"p": int(rng.integers(2, n // 2 + 1)), "frame_seed": int(rng.integers(2**31))}


def _qbound_conclusion(r, p, rng):
    f = random_frames(r.n, 1, np.random.default_rng(p["frame_seed"]))[0]
    return bf.q_quantity(r, p["p"], f)[1] - bf.q_lower_bound(r, p["p"])


def _weight_params(n, rng):
    return {"p": int(rng.integers(1, n // 2 + 1)), "alpha": (n + 2) / 2, "theta": float(rng.uniform(-0.5, 2.0))}


def _weight_conclusion(r, p, rng):
    low = float(np.linalg.eigvalsh(bf.weight_principle_form(r, p["p"], p["theta"]))[0])
    return low / max(1.0, r.norm())


def _betti_params(n, rng):
    p = int(rng.integers(2, n // 2 + 1))
    return {"p": p, "alpha": (n + 2) / 2, "theta": a_np(n, p)}


def _betti_conclusion(r, p, rng):
    low = float(bf.curvature_term(r, p["p"]).eigenvalues[0])
    return low / max(1.0, r.norm())


def _kahler_params(n, rng):
    m = n // 2
    top = (2 * m - 1) * (m + 1)
    a = float(rng.uniform(1.0, top))
    b = b_malpha(m, a)
    return {"alpha": a, "theta": b - float(rng.uniform(0.01, 0.5)) * (1 + b)}


def _kahler_hypothesis(r, p):
    """Larger of the cone margins of R and -R, divided by |R| (scale-free)."""
    op = r.second_kind
    m = max(_margin(r, p["alpha"], p["theta"]),
            float(cone_margins(-op.eigenvalues[::-1], p["alpha"], p["theta"])))
    return m / max(r.norm(), 1.0)


def _kahler_conclusion(r, p, rng):
    return kt.FLAT_TOL - r.norm()


def _planted_params(n, rng):
    return {"alpha": float(n_traceless(n) - 1), "theta": 0.0}


def _planted_conclusion(r, p, rng):
    vals = sectional_batch(r.matrix, random_frames(r.n, 200, rng))
    return float(vals.min())


def _fixed_cone(n, p):
    return p["alpha"], p["theta"]


CLAIMS: dict[str, Claim] = {c.id: c for c in [
    Claim("ricci", "cone C(alpha, theta) bounds Ricci below by ricci_bound * mean",
          lambda n: 3 <= n, _ricci_params, lambda r, p: _margin(r, p["alpha"], p["theta"]),
          _ricci_conclusion, _fixed_cone),
    Claim("pic", "four-dimensional cone C(alpha, pic_theta(alpha)) gives nonnegative isotropic curvature",
          lambda n: n == 4, _pic_params, lambda r, p: _margin(r, p["alpha"], p["theta"]),
          _pic_conclusion, _fixed_cone, conclusion_tol=imp.SAMPLED_TOL),
    Claim("p-ricci", "cone C((n-1)p/2, theta) bounds partial Ricci traces below",
          lambda n: 3 <= n, _pricci_params, lambda r, p: _margin(r, p["alpha"], p["theta"]),
          _pricci_conclusion, _fixed_cone),
    Claim("q-bound", "Q in any frame is at least 2(n-p+1) times the (n-1)p/2 partial eigenvalue sum",
          lambda n: 4 <= n, _qbound_params, lambda r, p: math.inf, _qbound_conclusion),
    Claim("weight", "(n+2)/2-nonnegativity of R + beta*mean*id makes the weighted S-action form nonnegative",
          lambda n: 3 <= n <= 8, _weight_params, lambda r, p: _margin(r, p["alpha"], p["theta"]),
          _weight_conclusion, _fixed_cone, conclusion_tol=EIG_TOL),
    Claim("betti", "cone C((n+2)/2, A_np) makes the p-form curvature term nonnegative",
          lambda n: 5 <= n <= 8, _betti_params, lambda r, p: _margin(r, p["alpha"], p["theta"]),
          _betti_conclusion, _fixed_cone, conclusion_tol=EIG_TOL),
    Claim("kahler-flat", "Kähler tensor with +-R in C(alpha, theta), theta < B_m,alpha, vanishes",
          lambda n: n % 2 == 0 and 4 <= n <= 8, _kahler_params, _kahler_hypothesis,
          _kahler_conclusion, kahler=True, conclusion_tol=0.0),
    Claim("planted-sectional", "FALSE control: C(N-1, 0) implies positive sectional curvature",
          lambda n: 3 <= n, _planted_params, lambda r, p: _margin(r, p["alpha"], p["theta"]),
          _planted_conclusion, _fixed_cone, planted=True),
]}

THEOREM_CLAIMS = [c for c in CLAIMS if not CLAIMS[c].planted]


# ---------------------------------------------------------------------------
# generators


def sample_rng(seed: int, claim_id: str, idx: int) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(claim_id.encode()), idx])


def shift_to_boundary(r: AlgebraicCurvature, alpha: float, theta: float, jitter: float = 0.0) -> AlgebraicCurvature:
    """Add a multiple of the unit sphere so the cone margin becomes ``jitter`` (>= 0 stays inside).

    The sphere shifts every second-kind eigenvalue by the same amount, so the
    margin moves by ``s (1 + theta)``.
    """
    m0 = _margin(r, alpha, theta)
    s = (jitter - m0) / (1.0 + theta)
    return r + constant_curvature(r.n, s)


def _kahler_biased(r: AlgebraicCurvature, p: dict) -> AlgebraicCurvature:
    """Move along the constant-HSC direction to the largest normalized cone margin."""
    h, _ = kt.constant_hsc(r.n // 2, 4.0)
    scale = r.norm()
    # both the second-kind matrix and the wedge matrix are linear in the tensor;
    # the four-index norm is twice the Frobenius norm of the wedge matrix
    a0, a1 = r.second_kind.matrix, h.second_kind.matrix
    m0, m1 = r.matrix, h.matrix

    def neg(s):
        eig = np.linalg.eigvalsh(a0 + s * a1)
        m = max(float(cone_margins(eig, p["alpha"], p["theta"])),
                float(cone_margins(-eig[::-1], p["alpha"], p["theta"])))
        return -m / max(2.0 * np.linalg.norm(m0 + s * m1), 1e-300)

    res = minimize_scalar(neg, bounds=(-2 * scale, 2 * scale), method="bounded",
                          options={"xatol": 1e-10 * max(scale, 1.0)})
    return r + h * float(res.x)


def draw(claim: Claim, n: int, rng: np.random.Generator, biased: bool) -> tuple[AlgebraicCurvature, dict]:
    params = claim.params(n, rng)
    if claim.kahler:
        r, _ = kt.random_kahler(n // 2, rng)
        return (_kahler_biased(r, params) if biased else r), params
    r = bianchi_project(random_matrices(n, rng))
    if biased and claim.cone is not None:
        alpha, theta = claim.cone(n, params)
        jitter = 0.0 if rng.random() < 0.5 else float(rng.uniform(0, SHIFT_JITTER))
        r = shift_to_boundary(r, alpha, theta, jitter)
    return r, params


# ---------------------------------------------------------------------------
# reports


@dataclass
class ClaimStats:
    claim: str
    n: int
    samples: int = 0
    hypothesis_met: int = 0
    violations: int = 0
    worst_conclusion: float | None = None
    worst_index: int | None = None
    best_hypothesis: float | None = None
    failing: list = field(default_factory=list)

    def add(self, idx: int, hyp: float, concl: float | None, violated: bool, limit: int = 20):
        self.samples += 1
        if math.isfinite(hyp) and (self.best_hypothesis is None or hyp > self.best_hypothesis):
            self.best_hypothesis = hyp
        if concl is None:
            return
        self.hypothesis_met += 1
        if self.worst_conclusion is None or concl < self.worst_conclusion:
            self.worst_conclusion, self.worst_index = concl, idx
        if violated:
            self.violations += 1
            if len(self.failing) < limit:
                self.failing.append({"index": idx, "hypothesis_margin": hyp, "conclusion_margin": concl})


@dataclass
class CampaignReport:
    command: str
    seed: int
    samples: int
    tolerances: dict
    checks: list
    failures: int
    version: str = FORMAT_VERSION
    wall_time: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["wall_time"] is None:
            del d["wall_time"]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, float) and math.isinf(o):
        return "inf"
    raise TypeError(f"not serializable: {type(o)}")


def evaluate(claim: Claim, r: AlgebraicCurvature, params: dict, rng: np.random.Generator,
             tol: float = CONE_TOL) -> tuple[float, float | None, bool]:
    """(hypothesis margin, conclusion margin or None if the hypothesis fails, violated)."""
    hyp = claim.hypothesis(r, params)
    if hyp < -tol:
        return hyp, None, False
    concl = claim.conclusion(r, params, rng)
    return hyp, concl, concl < -claim.conclusion_tol


def _local_search(claim: Claim, r: AlgebraicCurvature, params: dict, concl: float,
                  rng: np.random.Generator, steps: int, tol: float):
    """Greedy random perturbations that lower the conclusion margin while keeping the hypothesis."""
    best_r, best = r, concl
    step = 0.1
    for _ in range(steps):
        cand = best_r + bianchi_project(random_matrices(r.n, rng, scale=step * max(best_r.norm(), 1e-12)))
        if claim.cone is not None and not claim.kahler:
            alpha, theta = claim.cone(r.n, params)
            cand = shift_to_boundary(cand, alpha, theta)
        if claim.kahler:
            cand = kt.project_kahler(cand)
        hyp, c, _ = evaluate(claim, cand, params, rng, tol)
        if c is not None and c < best:
            best_r, best = cand, c
        else:
            step *= 0.7
    return best_r, best


def run_claim(claim: Claim, n: int, samples: int, seed: int, tol: float = CONE_TOL,
              local_steps: int = 0, out_dir: Path | None = None, stop_on_first: bool = False) -> ClaimStats:
    if not claim.valid(n):
        raise ValueError(f"claim {claim.id!r} does not apply to n={n}")
    stats = ClaimStats(claim.id, n)
    for idx in range(samples):
        rng = sample_rng(seed, claim.id, idx)
        r, params = draw(claim, n, rng, biased=bool(idx % 2))
        hyp, concl, violated = evaluate(claim, r, params, rng, tol)
        if concl is not None and not violated and local_steps and concl < 1e-3:
            r2, c2 = _local_search(claim, r, params, concl, rng, local_steps, tol)
            if c2 < -claim.conclusion_tol:
                r, concl, violated = r2, c2, True
                hyp = claim.hypothesis(r, params)
        stats.add(idx, hyp, concl, violated)
        if violated and out_dir is not None:
            _persist(out_dir, claim, n, seed, idx, r, params, hyp, concl)
        if violated and stop_on_first:
            break
    return stats


def _persist(out_dir: Path, claim: Claim, n: int, seed: int, idx: int, r, params, hyp, concl) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{claim.id}-n{n}-seed{seed}-{idx}.json"
    save(r, path, claim=claim.id, seed=seed, index=idx, params=params,
         hypothesis_margin=hyp, conclusion_margin=concl)


def campaign(claim_ids, dims, samples: int, seed: int, tol: float = CONE_TOL, local_steps: int = 0,
             out_dir=None, command: str = "verify", timing: bool = False) -> CampaignReport:
    t0 = time.perf_counter()
    out = Path(out_dir) if out_dir is not None else None
    checks, failures = [], 0
    for cid in claim_ids:
        claim = CLAIMS[cid]
        for n in dims:
            if not claim.valid(n):
                continue
            st = run_claim(claim, n, samples, seed, tol, local_steps, out)
            d = asdict(st)
            d["planted"] = claim.planted
            # a planted false claim "passes" when the miner finds it; theorem claims pass with zero violations
            d["passed"] = (st.violations > 0) if claim.planted else (st.violations == 0)
            failures += 0 if d["passed"] else 1
            checks.append(d)
    tolerances = {"cone": tol, "eig": EIG_TOL, "sampled": imp.SAMPLED_TOL, "flat": kt.FLAT_TOL}
    wall = time.perf_counter() - t0 if timing else None
    return CampaignReport(command, seed, samples, tolerances, checks, failures, wall_time=wall)


# ---------------------------------------------------------------------------
# identity corpus


def identity_residuals(n: int, seed: int, idx: int) -> dict:
    """Residuals of every exact identity applicable in dimension ``n`` for one random sample."""
    rng = sample_rng(seed, "identities", idx)
    r = bianchi_project(random_matrices(n, rng))
    f = random_frames(n, 1, rng)[0]
    out = {}
    l1, r1, l2, r2 = imp.cylinder_frame_identities(r, axis=int(rng.integers(n)), frame=f)
    out["cylinder-phi1"] = abs(l1 - r1)
    out["cylinder-rest"] = abs(l2 - r2)
    if n == 4:
        a, b = imp.cp2_frame_identity(r, f)
        out["cp2-frame"] = abs(a - b)
    for p in range(1, n // 2 + 1):
        a, b = bf.q_quantity(r, p, f)
        out[f"q-identity-p{p}"] = abs(a - b)
    for p in range(1, n):
        a, b = bf.norm_identity_check(bf.PForm.random(n, p, rng))
        out[f"norm-p{p}"] = abs(a - b)
    op = r.second_kind
    out["trace"] = abs(op.trace - (n + 2) / (2 * n) * float(np.trace(ricci(r))))
    if n % 2 == 0:
        m = n // 2
        rk, cs = kt.random_kahler(m, rng)
        res = kt.trace_identities(rk, cs, cs.adapted_frame(rng))
        out.update({"kahler-pair": res.pair_sum, "kahler-theta": res.theta_diag,
                    "kahler-plus-trace": res.plus_trace, "kahler-minus-trace": res.minus_trace})
    return out


def identity_campaign(dims, samples: int, seed: int, tol: float = 1e-10) -> CampaignReport:
    checks, failures = [], 0
    for n in dims:
        worst: dict[str, float] = {}
        failing = []
        for idx in range(samples):
            res = identity_residuals(n, seed, idx)
            for k, v in res.items():
                worst[k] = max(worst.get(k, 0.0), v)
            if any(v > tol for v in res.values()) and len(failing) < 20:
                failing.append({"index": idx, "residuals": {k: v for k, v in res.items() if v > tol}})
        passed = all(v <= tol for v in worst.values())
        failures += 0 if passed else 1
        checks.append({"claim": "identities", "n": n, "samples": samples, "worst": worst,
                       "failing": failing, "passed": passed})
    return CampaignReport("verify", seed, samples, {"identity": tol}, checks, failures)


__all__ = [
    "Claim", "CLAIMS", "THEOREM_CLAIMS", "CampaignReport", "ClaimStats", "campaign", "run_claim",
    "evaluate", "draw", "shift_to_boundary", "sample_rng", "identity_campaign", "identity_residuals",
    "partial_sum",
]
