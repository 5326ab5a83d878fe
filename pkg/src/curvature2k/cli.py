"""Pinching cones, model spectra and seeded verification of curvature implications.

Exit codes: 0 when every check passes, 1 on a failed check, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bochner_forms as bf
from . import campaign as cp
from . import kahler_tools as kt
from . import model_spaces as ms
from .cones import (
    CONE_TOL, ConeParams, a_np, b_malpha, cone_membership, pic_theta, theta_cylinder,
)
from .curvature_ops import AlgebraicCurvature, load
from .tensor_space import MAX_DIM, n_traceless

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    m: int | None = None
    k: int | None = None
    p: int | None = None
    alpha: float | None = None
    theta: float | None = None
    samples: int = 1000
    seed: int | None = None
    tol: float = CONE_TOL
    spec: str | None = None
    model: str | None = None
    kappa1: float = 1.0
    kappa2: float = 1.0
    c: float = 4.0
    prop: str = "all"
    claim: str = "all"
    table: str = "theta"
    step: float = 0.5
    out: str | None = None
    local_steps: int = 0
    timing: bool = False
    fmt: str = "text"
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.command in ("verify", "falsify") and self.seed is None:
            raise UsageError(f"{self.command} needs --seed")
        if self.samples < 1:
            raise UsageError("--samples must be positive")
        if self.tol <= 0:
            raise UsageError("--tol must be positive")
        if self.n is not None and not 2 <= self.n <= MAX_DIM:
            raise UsageError(f"--n must lie in [2, {MAX_DIM}]")
        return self


@dataclass
class Result:
    """Outcome of one command: a JSON-able payload, optional table rows, failure count."""
    payload: dict
    rows: list | None = None
    header: list | None = None
    failures: int = 0


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"not serializable: {type(o)}")


def _clean(o):
    """Replace non-finite floats so the JSON stays standard."""
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


# ---------------------------------------------------------------------------
# tensor and model resolution


def _model_spec(cfg: RunConfig, name: str) -> ms.ModelSpec:
    kind = {"cp": "cp_fubini_study", "cpm": "cp_fubini_study"}.get(name, name)
    if kind == "einstein":
        if cfg.n is None or cfg.k is None:
            raise UsageError("einstein model needs --n and --k")
        return ms.einstein_sphere_product(cfg.n, cfg.k)
    if kind not in ms.KINDS:
        raise UsageError(f"unknown model {name!r}; expected one of {ms.KINDS + ('einstein',)}")
    try:
        return ms.ModelSpec(kind, n=cfg.n if kind not in ("cp_fubini_study", "cp_product") else None,
                            m=cfg.m, k=cfg.k, kappa1=cfg.kappa1, kappa2=cfg.kappa2, c=cfg.c)
    except ValueError as e:
        raise UsageError(str(e)) from e


def resolve(cfg: RunConfig) -> tuple[AlgebraicCurvature, ms.ModelSpec | None, str]:
    """Curvature from ``--spec`` (model name or JSON file) or ``--model``."""
    src = cfg.spec or cfg.model
    if src is None:
        raise UsageError("need --spec <model|file> or --model")
    path = Path(src)
    if path.suffix == ".json" or path.exists():
        try:
            return load(path), None, str(path)
        except (OSError, ValueError) as e:
            raise UsageError(str(e)) from e
    spec = _model_spec(cfg, src)
    return ms.build(spec), spec, spec.kind


# ---------------------------------------------------------------------------
# commands


def cmd_threshold(cfg: RunConfig) -> Result:
    t = cfg.table
    rows = []
    if t == "theta":
        n = cfg.n or 4
        big_n = n_traceless(n)
        grid = sorted(set(np.arange(1.0, big_n, cfg.step).tolist()) | {float(n)})
        rows = [(a, theta_cylinder(n, a)) for a in grid]
        header = ["alpha", f"theta_bar_{n}"]
    elif t == "B":
        m = cfg.m or 2
        top = (2 * m - 1) * (m + 1)
        grid = sorted(set(np.arange(1.0, top, cfg.step).tolist()) | {float(m * m - 1)})
        rows = [(a, b_malpha(m, a)) for a in grid]
        header = ["alpha", f"B_{m}"]
    elif t == "A":
        n = cfg.n or 5
        if n < 5:
            raise UsageError("A table needs --n >= 5")
        rows = [(p, a_np(n, p)) for p in range(2, n // 2 + 1)]
        header = ["p", f"A_{n}"]
    elif t == "pic":
        grid = np.arange(1.0, 9.0, cfg.step).tolist()
        rows = [(a, pic_theta(a)) for a in grid]
        header = ["alpha", "theta_pic"]
    else:
        raise UsageError(f"unknown table {t!r}")
    return Result({"table": t, "rows": [list(r) for r in rows]}, rows, header)


def cmd_spectrum(cfg: RunConfig) -> Result:
    r, spec, label = resolve(cfg)
    eigs = r.second_kind.eigenvalues
    got = ms.cluster_spectrum(eigs)
    payload = {"source": label, "n": r.n, "computed": got}
    failures = 0
    if spec is not None:
        exp = ms.expected_spectrum(spec)
        mis = ms.spectrum_mismatch(got, exp)
        ok = mis <= 1e-9
        failures = 0 if ok else 1
        payload.update({"expected": exp, "mismatch": mis, "match": ok})
    rows = [(v, k) for v, k in got]
    return Result(payload, rows, ["eigenvalue", "multiplicity"], failures)


def cmd_check_cone(cfg: RunConfig) -> Result:
    if cfg.alpha is None or cfg.theta is None:
        raise UsageError("check-cone needs --alpha and --theta")
    r, _, label = resolve(cfg)
    try:
        v = cone_membership(r.second_kind, ConeParams(cfg.alpha, cfg.theta).check(r.n), cfg.tol)
    except ValueError as e:
        raise UsageError(str(e)) from e
    payload = {"source": label, "alpha": cfg.alpha, "theta": cfg.theta, "margin": v.margin,
               "membership": v.membership.value, "tol": cfg.tol}
    failures = 0
    expect = cfg.extra.get("expect")
    if expect:
        ok = v.membership.value == expect or (expect == "member" and v.member)
        payload["expected"] = expect
        failures = 0 if ok else 1
    return Result(payload, [(v.membership.value, v.margin)], ["membership", "margin"], failures)


def _dims(cfg: RunConfig, default):
    return [cfg.n] if cfg.n is not None else default


def cmd_verify(cfg: RunConfig) -> Result:
    prop = cfg.prop
    props = {"all": None, "identities": None, **{c: None for c in cp.THEOREM_CLAIMS}}
    if prop not in props:
        raise UsageError(f"unknown --prop {prop!r}; expected one of {sorted(props)}")
    dims = _dims(cfg, [3, 4, 5, 6])
    reports = []
    if prop in ("identities", "all"):
        reports.append(cp.identity_campaign([d for d in dims if d <= 8], min(cfg.samples, 1000), cfg.seed))
    if prop != "identities":
        claims = cp.THEOREM_CLAIMS if prop == "all" else [prop]
        reports.append(cp.campaign(claims, dims, cfg.samples, cfg.seed, cfg.tol, cfg.local_steps,
                                   cfg.out, "verify", cfg.timing))
    return _merge(reports, "verify", cfg)


def cmd_falsify(cfg: RunConfig) -> Result:
    claims = list(cp.CLAIMS) if cfg.claim == "all" else [cfg.claim]
    for c in claims:
        if c not in cp.CLAIMS:
            raise UsageError(f"unknown claim {c!r}; expected one of {sorted(cp.CLAIMS)}")
    dims = _dims(cfg, [4, 5])
    rep = cp.campaign(claims, dims, cfg.samples, cfg.seed, cfg.tol, cfg.local_steps or 10,
                      cfg.out or "violations", "falsify", cfg.timing)
    res = _merge([rep], "falsify", cfg)
    res.payload["note"] = "absence of violations is evidence, not proof"
    return res


def _merge(reports, command, cfg) -> Result:
    checks = [c for rep in reports for c in rep.checks]
    failures = sum(rep.failures for rep in reports)
    tol = {}
    for rep in reports:
        tol.update(rep.tolerances)
    payload = {"version": cp.FORMAT_VERSION, "command": command, "seed": cfg.seed, "samples": cfg.samples,
               "tolerances": tol, "checks": checks, "failures": failures}
    if cfg.timing:
        payload["wall_time"] = sum(rep.wall_time or 0.0 for rep in reports)
    def worst(c):
        w = c.get("worst_conclusion", c.get("worst", ""))
        return max(w.values()) if isinstance(w, dict) else w

    rows = [(c["claim"], c["n"], c.get("hypothesis_met", ""), c.get("violations", ""), worst(c),
             c.get("best_hypothesis", ""), "pass" if c["passed"] else "FAIL") for c in checks]
    header = ["claim", "n", "hyp_met", "violations", "worst", "best_hyp", "status"]
    return Result(payload, rows, header, failures)


def cmd_bochner(cfg: RunConfig) -> Result:
    r, _, label = resolve(cfg)
    p = cfg.p or 2
    try:
        term = bf.curvature_term(r, p)
        cert = bf.betti_certificate(r, p, cfg.theta) if r.n >= 5 and 2 <= p <= r.n // 2 else None
    except ValueError as e:
        raise UsageError(str(e)) from e
    eig = term.eigenvalues
    spec = ms.cluster_spectrum(eig, 1e-9)
    payload = {"source": label, "n": r.n, "p": p, "spectrum": spec,
               "min_eigenvalue": float(eig[0]),
               "sign": bf.sign_class(float(eig[0]), float(np.abs(eig).max())).value}
    if cert is not None:
        payload["certificate"] = cert.to_dict()
    return Result(payload, spec, ["eigenvalue", "multiplicity"])


def cmd_kahler(cfg: RunConfig) -> Result:
    if cfg.alpha is None:
        raise UsageError("kahler needs --alpha")
    if cfg.spec is None and cfg.model is None:
        cfg.model = "cp_fubini_study"
    r, _, label = resolve(cfg)
    if r.n % 2:
        raise UsageError("Kähler diagnostic needs even dimension")
    m = r.n // 2
    if cfg.m is not None and cfg.m != m:
        raise UsageError(f"--m {cfg.m} does not match tensor dimension {r.n}")
    theta = b_malpha(m, cfg.alpha) if cfg.theta is None else cfg.theta
    try:
        d = kt.kahler_cone_diagnostic(r, kt.ComplexStructure.standard(m), cfg.alpha, theta,
                                      np.random.default_rng(cfg.seed or 0), cfg.tol)
    except ValueError as e:
        raise UsageError(str(e)) from e
    payload = {"source": label, **d.to_dict()}
    rows = [(k, v) for k, v in payload.items()]
    return Result(payload, rows, ["field", "value"], 0 if d.passed else 1)


COMMANDS = {
    "threshold": cmd_threshold, "spectrum": cmd_spectrum, "check-cone": cmd_check_cone,
    "verify": cmd_verify, "bochner": cmd_bochner, "kahler": cmd_kahler, "falsify": cmd_falsify,
}


def run(cfg: RunConfig) -> Result:
    cfg.validate()
    return COMMANDS[cfg.command](cfg)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    out = common.add_mutually_exclusive_group()
    out.add_argument("--json", dest="fmt", action="store_const", const="json", help="emit JSON")
    out.add_argument("--tsv", dest="fmt", action="store_const", const="tsv", help="emit a TSV table")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int, default=1000)
    common.add_argument("--tol", type=float, default=CONE_TOL)
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--p", type=int)
    common.add_argument("--alpha", type=ms.parse_value)
    common.add_argument("--theta", type=ms.parse_value)
    common.add_argument("--spec", help="model name or JSON tensor file")
    common.add_argument("--model", help="model name")
    common.add_argument("--kappa1", type=float, default=1.0)
    common.add_argument("--kappa2", type=float, default=1.0)
    common.add_argument("--c", type=float, default=4.0)
    common.add_argument("--out", help="output directory for violation files")
    common.add_argument("--timing", action="store_true", help="record wall time (breaks byte stability)")

    parser = argparse.ArgumentParser(prog="curvature2k", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    t = sub.add_parser("threshold", parents=[common], help="tabulate a cone threshold")
    t.add_argument("--table", choices=["theta", "A", "B", "pic"], default="theta")
    t.add_argument("--step", type=float, default=0.5)
    sub.add_parser("spectrum", parents=[common], help="second-kind spectrum of a model or file")
    c = sub.add_parser("check-cone", parents=[common], help="cone membership of a model or file")
    c.add_argument("--expect", choices=["interior", "boundary", "outside", "member"])
    v = sub.add_parser("verify", parents=[common], help="seeded verification campaign")
    v.add_argument("--prop", default="all")
    v.add_argument("--local-steps", type=int, default=0)
    sub.add_parser("bochner", parents=[common], help="p-form curvature term spectrum and certificate")
    sub.add_parser("kahler", parents=[common], help="Kähler rigidity diagnostic")
    f = sub.add_parser("falsify", parents=[common], help="hunt for violations of conditional claims")
    f.add_argument("--claim", default="all")
    f.add_argument("--local-steps", type=int, default=10)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for name in ("n", "m", "k", "p", "alpha", "theta", "samples", "seed", "tol", "spec", "model",
                 "kappa1", "kappa2", "c", "out", "timing"):
        setattr(cfg, name, getattr(ns, name))
    cfg.fmt = ns.fmt or "text"
    for name in ("prop", "claim", "table", "step", "local_steps"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if getattr(ns, "expect", None):
        cfg.extra["expect"] = ns.expect
    return cfg


def emit(res: Result, fmt: str, stream=None) -> None:
    stream = sys.stdout if stream is None else stream
    if fmt == "json":
        stream.write(json.dumps(_clean(res.payload), indent=2, sort_keys=True, default=_jsonable) + "\n")
        return
    if fmt == "tsv" and res.rows is not None:
        stream.write("\t".join(res.header) + "\n")
        for row in res.rows:
            stream.write("\t".join(_fmt(x) for x in row) + "\n")
        return
    for k, v in res.payload.items():
        if k in ("rows", "checks") and isinstance(v, list):
            continue
        stream.write(f"{k}: {v}\n")
    if res.rows is not None and res.header != ["field", "value"]:
        stream.write("  ".join(res.header) + "\n")
        for row in res.rows:
            stream.write("  ".join(_fmt(x) for x in row) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
        res = run(cfg)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    emit(res, cfg.fmt)
    return EXIT_FAIL if res.failures else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
