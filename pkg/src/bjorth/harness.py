"""Command-line reports: worked-example checks, p-scans and the basis explorer.

Three subcommands share one set of flags::

    bjorth verify-paper [--out FILE] [--format json|csv]
    bjorth scan-p --p 1.5 --p 3 --k 2 --samples 500
    bjorth explore-conjecture --p 2 --p 3 --dim 2 --dim 3 --seed 0 --target lemma

Reports are deterministic: the same flags give byte-identical files.
Numbers are written with 12 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .approximation import approx_coapprox_discrepancy, best_coapproximation_1d, coapprox_violation
from .construction import (
    MAX_SEARCH_DIM,
    complete_strongly_orthonormal_basis,
    verify_coapprox_bound,
)
from .orthogonality import skew_pair, strongly_orthonormal_relative, strongly_orthonormal_set, symmetry_defect
from .space import EPS, INF, PNormSpace, format_p, gaussian_directions, parse_p

REPORT_VERSION = "bjorth-report-1"

SCAN_COLUMNS = ["p", "k_param", "lemma_defect", "max_discrepancy_1d", "n_samples"]
EXPLORE_COLUMNS = ["p", "n", "seed", "target", "found", "best_residual", "trials"]

#: Violation above which theta is declared "not a best coapproximation".
REFUTE_MARGIN = 1e-3

_TRIPLE = ("a = 2^(-1/3)(1,1,0), b = 4^(-1/3)(1,-1,2^(1/3)), "
           "d = 4^(-1/3)(1,-1,-2^(1/3)) in l_3^3")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    ps: list[float] = field(default_factory=list)
    dims: list[int] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    eps: float = EPS
    sample_count: int = 500
    out: str | None = None
    format: str = "json"
    k_params: list[float] = field(default_factory=lambda: [1.5, 2.0, 3.0])
    trials: int = 20
    target: str = "random"

    def validate(self):
        if not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if any(n < 2 for n in self.dims):
            raise ConfigError("dimensions must be >= 2")
        if self.sample_count < 1:
            raise ConfigError("sample count must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if any(not k > 1.0 or not math.isfinite(k) for k in self.k_params):
            raise ConfigError("k parameters must be finite and > 1")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")

    def as_dict(self) -> dict:
        return {
            "p": [format_p(p) for p in self.ps],
            "dims": list(self.dims),
            "seeds": list(self.seeds),
            "eps": self.eps,
            "samples": self.sample_count,
            "k": list(self.k_params),
            "trials": self.trials,
            "target": self.target,
        }


@dataclass
class CheckRecord:
    id: str
    description: str
    status: str
    details: dict

    def as_dict(self) -> dict:
        return {"id": self.id, "description": self.description, "status": self.status,
                "details": self.details}


def _check(id_, description, passed: bool, details: dict) -> CheckRecord:
    return CheckRecord(id_, description, "pass" if passed else "fail", details)


# -- worked examples ------------------------------------------------------------


def _cube_root_triple():
    """Three unit vectors of l_3^3 built from (1,1,0) and (1,-1,+-2^(1/3))."""
    c = 2.0 ** (1.0 / 3.0)
    a = np.array([1.0, 1.0, 0.0]) / c
    raw = np.array([1.0, -1.0, c])
    b = raw / 4.0 ** (1.0 / 3.0)
    d = np.array([1.0, -1.0, -c]) / 4.0 ** (1.0 / 3.0)
    return a, raw, b, d


def _hadamard_rows():
    return np.array([[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, -1, 1], [1, -1, 1, -1]], dtype=float)


def _embedded_skew_point(p: float, n: int, k: float = 2.0) -> np.ndarray:
    x, _ = skew_pair(p, k)
    return np.r_[x, np.zeros(n - 2)]


def check_cube_root_set(config: RunConfig) -> CheckRecord:
    space = PNormSpace(3, 3)
    a, raw, b, d = _cube_root_triple()
    seed = config.seeds[0]
    pair_ok = strongly_orthonormal_set(space, [a, d], config.eps, seed)
    triple_ok = strongly_orthonormal_set(space, [a, b, d], config.eps, seed)
    viol, witness = coapprox_violation(space, b, np.zeros(3), [a, d], config.sample_count, seed)
    return _check(
        "example-2.3",
        f"{_TRIPLE}: {{a, d}} and {{a, b, d}} are strongly orthonormal, yet theta is not the best "
        "coapproximation to b out of span{a, d}; the listed third vector has norm 4^(1/3) "
        "and is normalized to b before use",
        pair_ok and triple_ok and viol > REFUTE_MARGIN and witness is not None,
        {
            "raw_third_vector": list(raw),
            "raw_third_norm": space.norm(raw),
            "normalized_third_vector": list(b),
            "pair_strongly_orthonormal": pair_ok,
            "triple_strongly_orthonormal": triple_ok,
            "theta_violation": viol,
            "violation_threshold": REFUTE_MARGIN,
            "witness": None if witness is None else list(witness),
        },
    )


def check_hadamard(config: RunConfig) -> CheckRecord:
    space = PNormSpace(4, INF)
    H = _hadamard_rows()
    seed = config.seeds[0]
    basis_ok = strongly_orthonormal_set(space, H, config.eps, seed)
    x = H[2]
    G = H[[0, 1, 3]]
    viol, witness = coapprox_violation(space, x, np.zeros(4), G, config.sample_count, seed)
    return _check(
        "example-2.9",
        "l_inf^4: the Hadamard rows are a strongly orthonormal basis, yet theta is not the "
        "best coapproximation to (1,-1,-1,1) out of the span of the other rows",
        basis_ok and viol > REFUTE_MARGIN and witness is not None,
        {
            "basis_strongly_orthonormal": basis_ok,
            "theta_violation": viol,
            "violation_threshold": REFUTE_MARGIN,
            "witness": None if witness is None else list(witness),
        },
    )


def check_cube_root_basis(config: RunConfig) -> CheckRecord:
    space = PNormSpace(3, 3)
    a, _, b, d = _cube_root_triple()
    seed = config.seeds[0]
    basis_ok = strongly_orthonormal_set(space, [a, b, d], config.eps, seed)
    viol, witness = coapprox_violation(space, b, np.zeros(3), [a, d], config.sample_count, seed)
    return _check(
        "example-2.10",
        f"{_TRIPLE}: {{a, b, d}} is a strongly orthonormal basis, yet theta is not the best "
        "coapproximation to b out of span{a, d}",
        basis_ok and viol > REFUTE_MARGIN and witness is not None,
        {
            "basis_strongly_orthonormal": basis_ok,
            "theta_violation": viol,
            "violation_threshold": REFUTE_MARGIN,
            "witness": None if witness is None else list(witness),
        },
    )


def check_skew_point(config: RunConfig) -> CheckRecord:
    ps = [1.5, 2.0, 2.5, 3.0, 4.0]
    ks = [1.5, 2.0, 3.0]
    defects = {(p, k): symmetry_defect(PNormSpace(2, p), *skew_pair(p, k)) for p in ps for k in ks}
    iff_ok = all((d <= 1e-9) == (p == 2.0) for (p, _), d in defects.items())
    closed = 14.0 / (65.0 ** (2.0 / 3.0) * 9.0 ** (1.0 / 3.0))
    d32 = defects[(3.0, 2.0)]
    return _check(
        "lemma-2.5",
        "in l_p^2 the point (1,k)/||(1,k)||_p is BJ-orthogonal to a direction that is not "
        "BJ-orthogonal back, except when p = 2",
        iff_ok and abs(d32 - closed) <= 1e-9,
        {
            "defect_p3_k2": d32,
            "closed_form_p3_k2": closed,
            "max_defect_p2": max(d for (p, _), d in defects.items() if p == 2.0),
            "min_defect_p_not_2": min(d for (p, _), d in defects.items() if p != 2.0),
            "zero_iff_p2": iff_ok,
        },
    )


def check_coapprox_bound(config: RunConfig) -> CheckRecord:
    space = PNormSpace(3, 3)
    a, _, b, d = _cube_root_triple()
    rep = verify_coapprox_bound(space, [a, d], b, np.zeros(3), config.sample_count,
                                config.seeds[0], config.eps)
    return _check(
        "theorem-2.2-bound",
        f"{_TRIPLE}; S = {{a, d}}, x = b, w = theta: ||x - y|| >= k ||w - y|| on sampled y in "
        "span S, with k the exact equivalence constant of the coefficient max-norm",
        rep.holds and 0.0 < rep.k < 1.0 and rep.min_ratio >= rep.k - 1e-8,
        {"k": rep.k, "min_ratio": rep.min_ratio, "samples": rep.samples},
    )


def _discrepancy_sample(p: float, dims, seeds, count: int) -> tuple[float, int]:
    worst, total = 0.0, 0
    for n in dims:
        space = PNormSpace(n, p)
        for seed in seeds:
            rng = np.random.default_rng(seed)
            X = gaussian_directions(rng, count, n)
            G = gaussian_directions(rng, count, n)
            for x, g in zip(X, G):
                d = approx_coapprox_discrepancy(space, x, g)
                worst = max(worst, d)
                total += 1
    return worst, total


def check_one_dim_coincidence(config: RunConfig) -> CheckRecord:
    worst2, count = _discrepancy_sample(2.0, [3], config.seeds, config.sample_count)
    d3 = approx_coapprox_discrepancy(PNormSpace(2, 3), [0.0, 1.0], [2.0, 1.0])
    return _check(
        "theorem-2.4",
        "best approximation and best coapproximation out of a line coincide for p = 2 "
        "and differ for p = 3",
        worst2 <= 1e-6 and d3 > 0.3,
        {"max_discrepancy_p2": worst2, "instances_p2": count,
         "discrepancy_p3_x01_g21": d3},
    )


def check_basis_completion(config: RunConfig) -> CheckRecord:
    seed = config.seeds[0]
    space2 = PNormSpace(3, 2.0)
    target = space2.sample_unit_sphere(seed, 1)[0]
    rep2 = complete_strongly_orthonormal_basis(space2, target, config.trials, seed, config.eps)
    details = {"p2_n3_found": rep2.found}
    ok = rep2.found
    for n in (2, 3):
        rep = complete_strongly_orthonormal_basis(
            PNormSpace(n, 3.0), _embedded_skew_point(3.0, n), config.trials, seed, config.eps)
        details[f"p3_n{n}_skew_found"] = rep.found
        details[f"p3_n{n}_best_residual"] = rep.best_residual
        ok = ok and not rep.found and rep.best_residual > 0.1
    return _check(
        "theorem-2.6",
        "a random unit vector of l_2^3 completes to a strongly orthonormal basis; the skew "
        "point (1,2)/||(1,2)||_3, alone and padded with a zero, does not in l_3",
        ok, details)


def _theta_is_coapprox(space: PNormSpace, basis, config: RunConfig) -> float:
    worst = 0.0
    for i in range(len(basis)):
        others = [basis[j] for j in range(len(basis)) if j != i]
        v, _ = coapprox_violation(space, basis[i], np.zeros(space.dim), others,
                                  config.sample_count, config.seeds[0])
        worst = max(worst, v)
    return worst


def check_inner_product_pair(config: RunConfig) -> CheckRecord:
    space = PNormSpace(3, 2.0)
    E = np.eye(3)
    basis_ok = strongly_orthonormal_set(space, E, config.eps, config.seeds[0])
    worst = _theta_is_coapprox(space, E, config)
    return _check(
        "theorem-2.7-p2",
        "l_2^3: the standard basis is strongly orthonormal and theta is the best "
        "coapproximation to each e_i out of the span of the others",
        basis_ok and worst <= 1e-9,
        {"basis_strongly_orthonormal": basis_ok, "max_theta_violation": worst},
    )


def check_non_inner_product_pair(config: RunConfig) -> CheckRecord:
    seed = config.seeds[0]
    space = PNormSpace(3, 3.0)
    E = np.eye(3)
    worst = _theta_is_coapprox(space, E, config)
    rep = complete_strongly_orthonormal_basis(space, _embedded_skew_point(3.0, 3), config.trials,
                                              seed, config.eps)
    return _check(
        "theorem-2.7-p3",
        "l_3^3: the standard basis satisfies the coapproximation condition, but the padded "
        "skew point admits no strongly orthonormal basis, so the pair of conditions fails",
        worst <= 1e-9 and not rep.found,
        {"standard_basis_max_theta_violation": worst, "skew_point_basis_found": rep.found,
         "skew_point_best_residual": rep.best_residual},
    )


def check_coapprox_step(config: RunConfig) -> CheckRecord:
    space = PNormSpace(3, 3.0)
    x1 = space.normalize([1.0, 1.0, 0.0])
    x2 = space.normalize([0.0, 1.0, 1.0])
    res = best_coapproximation_1d(space, x2, x1)
    aug = [x1, space.normalize(x2 - res.w)]
    rel = strongly_orthonormal_relative(space, aug, 0, config.eps, config.seeds[0])
    return _check(
        "remark-2.1",
        "l_3^3: appending the normalized residual of a best coapproximation keeps the set "
        "strongly orthonormal relative to the original element",
        res.found and rel,
        {"coapproximation_found": res.found, "coefficient": float(res.coefficients[0]),
         "relative_after_step": rel},
    )


CHECKS = [
    check_cube_root_set,
    check_hadamard,
    check_cube_root_basis,
    check_skew_point,
    check_coapprox_bound,
    check_one_dim_coincidence,
    check_basis_completion,
    check_inner_product_pair,
    check_non_inner_product_pair,
    check_coapprox_step,
]


def run_verify_paper(config: RunConfig) -> list[CheckRecord]:
    records = []
    for fn in CHECKS:
        try:
            records.append(fn(config))
        except (ValueError, ArithmeticError) as exc:
            records.append(CheckRecord(fn.__name__, fn.__doc__ or fn.__name__, "inconclusive",
                                       {"error": str(exc)}))
    return records


# -- scans ------------------------------------------------------------------------


def scan_p_rows(config: RunConfig) -> list[dict]:
    ps = config.ps or [1.5, 2.0, 2.5, 3.0, 4.0]
    dims = config.dims or [2]
    rows = []
    for p in ps:
        worst, count = _discrepancy_sample(p, dims, config.seeds, config.sample_count)
        for k in config.k_params:
            smooth = PNormSpace(2, p).smooth()
            defect = symmetry_defect(PNormSpace(2, p), *skew_pair(p, k)) if smooth else None
            rows.append({"p": p, "k_param": k, "lemma_defect": defect,
                         "max_discrepancy_1d": worst, "n_samples": count})
    return rows


def explore_rows(config: RunConfig) -> list[dict]:
    ps = config.ps or [2.0, 3.0]
    dims = config.dims or [2, 3]
    if any(n > MAX_SEARCH_DIM for n in dims):
        raise ConfigError(f"explorer dimension cap is {MAX_SEARCH_DIM}")
    rows = []
    for p in ps:
        for n in dims:
            space = PNormSpace(n, p)
            for seed in config.seeds:
                if config.target == "lemma":
                    if not space.smooth():
                        raise ConfigError("the skew target needs 1 < p < inf")
                    target = _embedded_skew_point(p, n)
                else:
                    target = space.sample_unit_sphere(seed, 1)[0]
                rep = complete_strongly_orthonormal_basis(space, target, config.trials, seed,
                                                          config.eps)
                rows.append({"p": p, "n": n, "seed": seed, "target": list(target),
                             "found": rep.found, "best_residual": rep.best_residual,
                             "trials": rep.trials})
    return rows


# -- rendering ----------------------------------------------------------------------


def _num(v: float):
    v = float(v)
    if not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return float(f"{v:.12g}")


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _num(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v


def _cell(v, key: str = "") -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if key == "p":
            return format_p(float(v))
        return f"{float(v):.12g}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def render_json(config: RunConfig, key: str, items: list) -> str:
    doc = {"version": REPORT_VERSION, "config": config.as_dict(), key: items}
    return json.dumps(_jsonable(doc), indent=2) + "\n"


def render_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row[c], c) for c in columns])
    return buf.getvalue()


def render_checks_csv(records: list[CheckRecord]) -> str:
    rows = [{"id": r.id, "status": r.status, "description": r.description,
             "details": "; ".join(f"{k}={_cell(v)}" for k, v in r.details.items())}
            for r in records]
    return render_csv(["id", "status", "description", "details"], rows)


# -- CLI ---------------------------------------------------------------------------------


def _p_arg(text: str) -> float:
    try:
        return parse_p(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", action="append", type=_p_arg, default=[],
                        help="exponent in [1, inf]; repeatable, accepts 'inf'")
    common.add_argument("--dim", action="append", type=int, default=[], help="dimension; repeatable")
    common.add_argument("--seed", action="append", type=int, default=[], help="seed; repeatable")
    common.add_argument("--eps", type=float, default=EPS, help="strictness tolerance")
    common.add_argument("--samples", type=int, default=500, help="sample count")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("--trials", type=int, default=20, help="basis-search starts")

    parser = argparse.ArgumentParser(prog="bjorth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-paper", parents=[common],
                   help="run the worked-example checks; exit 0 iff all pass")
    scan = sub.add_parser("scan-p", parents=[common],
                          help="skew-point defect and 1-D discrepancy across p (CSV)")
    scan.add_argument("--k", action="append", type=float, default=[],
                      help="skew parameter k > 1; repeatable")
    explore = sub.add_parser("explore-conjecture", parents=[common],
                             help="search strongly orthonormal bases through targets (CSV)")
    explore.add_argument("--target", choices=["random", "lemma"], default="random",
                         help="random unit targets or the padded skew point (1,2,0,...)")
    return parser


def config_from_args(args) -> RunConfig:
    fmt = args.format or ("json" if args.command == "verify-paper" else "csv")
    cfg = RunConfig(ps=args.p, dims=args.dim, seeds=args.seed or [0], eps=args.eps,
                    sample_count=args.samples, out=args.out, format=fmt, trials=args.trials)
    if getattr(args, "k", None):
        cfg.k_params = args.k
    if getattr(args, "target", None):
        cfg.target = args.target
    cfg.validate()
    return cfg


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "verify-paper":
            records = run_verify_paper(cfg)
            if cfg.format == "json":
                text = render_json(cfg, "checks", [r.as_dict() for r in records])
            else:
                text = render_checks_csv(records)
            status = 0 if all(r.status == "pass" for r in records) else 1
        elif args.command == "scan-p":
            rows = scan_p_rows(cfg)
            text = (render_csv(SCAN_COLUMNS, rows) if cfg.format == "csv"
                    else render_json(cfg, "rows", rows))
            status = 0
        else:
            rows = explore_rows(cfg)
            text = (render_csv(EXPLORE_COLUMNS, rows) if cfg.format == "csv"
                    else render_json(cfg, "rows", rows))
            status = 0
    except ConfigError as exc:
        print(f"bjorth: config error: {exc}", file=sys.stderr)
        return 2
    try:
        _emit(text, cfg.out)
    except OSError as exc:
        print(f"bjorth: cannot write report: {exc}", file=sys.stderr)
        return 3
    if args.command == "verify-paper":
        for r in records:
            print(f"{r.status:>12}  {r.id}", file=sys.stderr)
    return status
