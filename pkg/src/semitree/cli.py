"""Command-line interface: ``semitree <command> [options]``.

Reports are JSON (with a top-level ``schema_version``) or CSV.  Rationals are
written as ``"p/q"`` strings and infinities as ``"inf"``; vertices are
slash-joined index words, the root being the empty word.  Exit status is 0
on success, 1 when a verification fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields, is_dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import posdef, spectra, spherical as sph, verify, walk
from .tree import TreeError, TreeParams, format_vertex, parse_vertex

SCHEMA_VERSION = 1
OUTPUT_DIR_ENV = "SEMITREE_OUTPUT_DIR"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: TreeParams
    depth: int | None
    mode: str | None
    tol: float
    seed: int
    fmt: str
    output: str | None

    def __post_init__(self):
        if self.tol <= 0:
            raise UsageError("--tol must be positive")
        if self.depth is not None and self.depth < 0:
            raise UsageError("--depth must be non-negative")


# serialization ----------------------------------------------------------------


def to_jsonable(obj):
    """Convert report values into plain JSON types.

    Tuples of integers are vertices and become index words; lists stay lists.
    """
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, complex):
        if obj.imag == 0:
            return to_jsonable(obj.real)
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, TreeParams):
        return {"q_plus": obj.q_plus, "q_minus": obj.q_minus}
    if isinstance(obj, tuple) and all(isinstance(x, int) and not isinstance(x, bool) for x in obj):
        return format_vertex(obj)
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in fields(obj)}
    return str(obj)


def _cell(value) -> str:
    value = to_jsonable(value)
    if isinstance(value, (dict, list)):
        return json.dumps(value, separators=(",", ":"))
    if value is None:
        return ""
    return str(value)


def _flatten(prefix: str, obj, out: list):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    else:
        out.append((prefix, obj))


def render(report: dict, fmt: str) -> str:
    body = {"schema_version": SCHEMA_VERSION, **report}
    if fmt == "json":
        return json.dumps(to_jsonable(body), indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    rows = report.get("rows")
    if rows:
        header = list(rows[0].keys())
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row.get(h)) for h in header])
    else:
        writer.writerow(["key", "value"])
        flat: list = []
        _flatten("", to_jsonable(body), flat)
        for k, v in flat:
            writer.writerow([k, _cell(v)])
    return buf.getvalue()


def _output_path(output: str | None) -> Path | None:
    if output is None or output == "-":
        return None
    path = Path(output)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def emit(text: str, output: str | None) -> None:
    path = _output_path(output)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# argument parsing -------------------------------------------------------------


def parse_gamma(text: str, mode: str | None):
    text = text.strip()
    if mode == "float":
        try:
            return complex(text) if "j" in text else float(text)
        except ValueError as exc:
            raise UsageError(f"cannot parse gamma {text!r}") from exc
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        if mode == "exact":
            raise UsageError(f"exact mode needs a rational gamma, got {text!r}") from None
    try:
        return complex(text) if "j" in text else float(text)
    except ValueError as exc:
        raise UsageError(f"cannot parse gamma {text!r}") from exc


def parse_grid(text: str) -> list[Fraction]:
    try:
        start, stop, step = (Fraction(part) for part in text.split(":"))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--gamma-grid expects start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError("--gamma-grid needs step > 0 and stop >= start")
    return verify.pd_grid(start, stop, step)


def _common(p: argparse.ArgumentParser, fmt: str = "json"):
    p.add_argument("--qplus", type=int, default=2, help="q+ (default 2)")
    p.add_argument("--qminus", type=int, default=3, help="q- (default 3)")
    p.add_argument("--depth", type=int, default=None, help="truncation depth of the working tree")
    p.add_argument("--mode", choices=["exact", "float"], default=None, help="arithmetic for gamma")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", dest="fmt", choices=["json", "csv"], default=fmt)
    p.add_argument("--output", default=None, help=f"report file (relative paths go under ${OUTPUT_DIR_ENV})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semitree", description="Spherical functions on semi-homogeneous trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spherical", help="values f_0..f_N of a spherical function")
    _common(p)
    p.add_argument("--gamma", required=True)
    p.add_argument("--levels", type=int, default=10)

    p = sub.add_parser("classify", help="boundedness and l^p verdict for an eigenvalue")
    _common(p)
    p.add_argument("--gamma", required=True)

    p = sub.add_parser("spectrum", help="real bounded and tempered sets, atom at zero")
    _common(p)

    p = sub.add_parser("lp-scan", help="l^p partial sums over a grid of exponents")
    _common(p, fmt="csv")
    p.add_argument("--gamma", required=True)
    p.add_argument("--pmin", type=float, default=1.0)
    p.add_argument("--pmax", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=21, help="number of grid points")
    p.add_argument("--levels", type=int, default=2000, help="levels summed")

    p = sub.add_parser("gram", help="Gram matrices of a spherical function on V+")
    _common(p)
    p.add_argument("--gamma", required=True)
    p.add_argument("--max-set-size", type=int, default=3)
    p.add_argument("--vertices", default=None, help="comma-separated vertex words for an explicit Gram matrix")

    p = sub.add_parser("posdef-scan", help="positive-definiteness over a gamma grid")
    _common(p, fmt="csv")
    p.add_argument("--gamma-grid", default="-3/2:3/2:1/20", help="start:stop:step (rationals allowed)")
    p.add_argument("--max-set-size", type=int, default=3)

    p = sub.add_parser("walk", help="isotropic random walk from the root")
    _common(p)
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--gamma", default=None, help="also compare E[phi(X_n)] with gamma^n")

    p = sub.add_parser("polynomials", help="Q_n and P_n coefficient lists")
    _common(p)
    p.add_argument("--nmax", type=int, default=5)

    p = sub.add_parser("verify", help="run identity suites")
    p.add_argument("suite", choices=[*verify.SUITES, "all"])
    _common(p)
    p.add_argument("--samples", type=int, default=200, help="random pairs per level-4+ isometry target")
    p.add_argument("--nmax", type=int, default=4)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--levels", type=int, default=200)
    p.add_argument("--max-set-size", type=int, default=3)
    return parser


# commands ---------------------------------------------------------------------


def _header(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "params": cfg.params}


def cmd_spherical(args, cfg):
    gamma = parse_gamma(args.gamma, cfg.mode)
    phi = sph.eval_spherical(cfg.params, gamma, args.levels, exact=cfg.mode == "exact" or None)
    rows = [{"n": n, "value": v} for n, v in enumerate(phi.values)]
    return {**_header(cfg, "spherical"), "gamma": phi.gamma, "exact": phi.exact, "rows": rows}, 0


def _classification(cls) -> dict:
    return {
        "gamma": cls.gamma,
        "bounded": cls.bounded,
        "growth": cls.growth_exact if cls.growth_exact is not None else cls.growth,
        "lp_exponent": cls.lp_exponent,
        "aligned": cls.aligned,
        "eigenvalues": list(cls.eigenvalues),
        "method": cls.method,
        "real": not isinstance(cls.gamma, complex),
    }


def cmd_classify(args, cfg):
    gamma = parse_gamma(args.gamma, cfg.mode)
    cls = sph.classify(cfg.params, gamma)
    return {**_header(cfg, "classify"), **_classification(cls)}, 0


def cmd_spectrum(args, cfg):
    rep = spectra.spectrum_report(cfg.params, cfg.tol)
    body = rep.to_dict()
    body.pop("params")
    return {**_header(cfg, "spectrum"), **body}, 0


def cmd_lp_scan(args, cfg):
    gamma = parse_gamma(args.gamma, cfg.mode)
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.steps == 1:
        grid = [args.pmin]
    else:
        h = (args.pmax - args.pmin) / (args.steps - 1)
        grid = [round(args.pmin + i * h, 12) for i in range(args.steps)]
    rows = spectra.lp_membership_scan(cfg.params, gamma, grid, args.levels)
    return {**_header(cfg, "lp-scan"), "gamma": gamma, "levels": args.levels, "rows": rows}, 0


def _gram_dict(rep: posdef.GramReport) -> dict:
    return {
        "vertices": rep.vertices,
        "matrix": rep.matrix,
        "eigenvalues": rep.eigenvalues,
        "min_eigenvalue": rep.min_eigenvalue,
        "psd": rep.psd,
        "tolerance": rep.tolerance,
        "exact_confirmed": rep.exact_confirmed,
        "note": rep.note,
    }


def cmd_gram(args, cfg):
    gamma = parse_gamma(args.gamma, cfg.mode)
    depth = 4 if cfg.depth is None else cfg.depth
    if args.vertices:
        verts = [parse_vertex(w, cfg.params) for w in args.vertices.split(",")]
    else:
        verts = posdef.canonical_vplus(cfg.params, depth)
    reach = max(len(v) for v in verts)
    phi = sph.eval_spherical(cfg.params, gamma, 2 * max(reach, depth + 2))
    gram = posdef.gram_matrix(phi, verts, cfg.tol)
    verdict = posdef.is_positive_definite(cfg.params, gamma, args.max_set_size, depth, seed=cfg.seed, tol=cfg.tol)
    return {
        **_header(cfg, "gram"),
        "gamma": phi.gamma,
        "gram": _gram_dict(gram),
        "positive_definite": {
            "passed": verdict.passed,
            "witness": verdict.witness,
            "reason": verdict.reason,
            "min_eigenvalue": verdict.min_eigenvalue,
            "matrices_checked": verdict.matrices_checked,
            "exact_confirmations": verdict.exact_confirmations,
        },
    }, 0


def cmd_posdef_scan(args, cfg):
    grid = parse_grid(args.gamma_grid)
    depth = 4 if cfg.depth is None else cfg.depth
    rows = []
    for g in grid:
        verdict = posdef.is_positive_definite(cfg.params, g, args.max_set_size, depth, seed=cfg.seed, tol=cfg.tol)
        rows.append(
            {
                "gamma": g,
                "positive_definite": verdict.passed,
                "bounded": sph.classify(cfg.params, g).bounded,
                "min_eigenvalue": verdict.min_eigenvalue,
                "witness": verdict.witness,
            }
        )
    return {**_header(cfg, "posdef-scan"), "rows": rows}, 0


def cmd_walk(args, cfg):
    n, trials = args.steps, args.trials
    if n < 0 or trials < 1:
        raise UsageError("--steps must be >= 0 and --trials >= 1")
    if cfg.depth is not None and n > cfg.depth - 1:
        raise UsageError(f"horizon {n} exceeds safe depth {cfg.depth - 1}")
    law = walk.exact_distribution(cfg.params, n)
    sim = walk.simulate(cfg.params, n, trials, cfg.seed)
    rows = []
    for ell, p in enumerate(law.level_mass):
        rows.append(
            {
                "level": ell,
                "exact_mass": p,
                "vertex_mass": law.vertex_mass(ell),
                "count": sim.counts[ell] if ell < len(sim.counts) else 0,
                "frequency": sim.frequencies[ell] if ell < len(sim.frequencies) else 0.0,
                "std_error": sim.std_errors[ell] if ell < len(sim.std_errors) else 0.0,
            }
        )
    out = {**_header(cfg, "walk"), "steps": n, "trials": trials, "seed": cfg.seed, "rows": rows}
    if args.gamma is not None:
        gamma = parse_gamma(args.gamma, cfg.mode)
        out["martingale"] = walk.eigen_martingale_check(cfg.params, gamma, n, trials, cfg.seed)
    return out, 0


def cmd_polynomials(args, cfg):
    qs = sph.q_polynomials(cfg.params, args.nmax)
    ps = sph.p_polynomials(cfg.params, args.nmax)
    rows = [
        {"n": n, "Q": list(qs[n].coefficients), "P": list(ps[n].coefficients)}
        for n in range(args.nmax + 1)
    ]
    return {**_header(cfg, "polynomials"), "order": "ascending powers", "rows": rows}, 0


def _suite_kwargs(name: str, args, cfg: RunConfig) -> dict:
    if name == "isometries":
        return {"depth": cfg.depth or 8, "samples": args.samples, "seed": cfg.seed}
    if name == "algebra":
        return {"depth": cfg.depth or 12, "nmax": args.nmax, "seed": cfg.seed}
    if name == "spherical":
        return {"levels": args.levels}
    if name == "posdef":
        return {"max_set_size": args.max_set_size, "depth": cfg.depth or 4, "seed": cfg.seed}
    if name == "spectra":
        return {"tol": cfg.tol}
    return {"trials": args.trials, "seed": cfg.seed}


def _suite_dict(rep: verify.SuiteReport) -> dict:
    return {
        "suite": rep.suite,
        "passed": rep.passed,
        "checks": [
            {"name": c.name, "passed": c.passed, "value": c.value, "witness": c.witness, **c.info}
            for c in rep.checks
        ],
    }


def cmd_verify(args, cfg):
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    suites = [_suite_dict(verify.SUITES[n](cfg.params, **_suite_kwargs(n, args, cfg))) for n in names]
    passed = all(s["passed"] for s in suites)
    body = {**_header(cfg, "verify"), "suite": args.suite, "verdict": "PASS" if passed else "FAIL", "passed": passed}
    if args.suite == "all":
        body["suites"] = suites
    else:
        body["checks"] = suites[0]["checks"]
    if not passed:
        body["failures"] = [
            {"suite": s["suite"], "name": c["name"], "witness": c["witness"], "value": c["value"]}
            for s in suites for c in s["checks"] if not c["passed"]
        ]
    return body, 0 if passed else 1


COMMANDS = {
    "spherical": cmd_spherical,
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
    "lp-scan": cmd_lp_scan,
    "gram": cmd_gram,
    "posdef-scan": cmd_posdef_scan,
    "walk": cmd_walk,
    "polynomials": cmd_polynomials,
    "verify": cmd_verify,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            params=TreeParams(args.qplus, args.qminus),
            depth=args.depth,
            mode=args.mode,
            tol=args.tol,
            seed=args.seed,
            fmt=args.fmt,
            output=args.output,
        )
        report, status = COMMANDS[args.command](args, cfg)
    except (UsageError, TreeError, TypeError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"semitree {args.command}: error: {exc}", file=sys.stderr)
        return 2
    emit(render(report, cfg.fmt), cfg.output)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
