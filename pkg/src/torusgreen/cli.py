"""Command line front end.

Subcommands: eval, critical, scan, thresholds, inequalities, mfe,
selftest.  All reports share one envelope {schema_version, command,
inputs, results, diagnostics}, serialized canonically: sorted keys,
floats at 17 significant digits with a lowercase exponent, complex
numbers as {re, im} objects.  Identical inputs produce byte identical
output; nothing time or machine dependent enters the envelope.

Exit codes: 0 success, 2 domain errors (bad modulus, no extra critical
point, off-lattice requests), 3 internal consistency violations (count
bound broken, comparison routes disagree, construction cross checks
fail) which are the loud falsifiers, 64 usage errors.
"""

from __future__ import annotations

import argparse
import io
import math
import re
import sys
from dataclasses import dataclass

from . import critical, green, mfe, moduli, selftest
from .errors import (
    BracketFailure,
    ConstructionInconsistent,
    CountViolation,
    HalfPeriodBranch,
    HalfPeriodInput,
    InconsistentComparison,
    NoConvergence,
    NoExtraCriticalPoint,
    NonPositiveImaginaryPart,
    NotACriticalPoint,
    NotInExtraRegime,
    PoleAtLattice,
    QuadratureNotConverged,
    Unconverged,
)
from .lattice import make_torus

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_INCONSISTENT = 3
EXIT_USAGE = 64

_DOMAIN_ERRORS = (
    NonPositiveImaginaryPart,
    PoleAtLattice,
    HalfPeriodInput,
    NotACriticalPoint,
    HalfPeriodBranch,
    NoExtraCriticalPoint,
    NotInExtraRegime,
    ValueError,
)
_CONSISTENCY_ERRORS = (
    CountViolation,
    InconsistentComparison,
    NoConvergence,
    ConstructionInconsistent,
    BracketFailure,
    QuadratureNotConverged,
    Unconverged,
)

_COMPLEX_RE = re.compile(
    r"""^\s*
    # a leading number is the real part only when a signed imaginary part
    # or the end of the text follows; otherwise it belongs to the i term
    (?P<re>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?=[+-]|\s*$))?
    (?P<im>(?:[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|[+-])?[ij])?
    \s*$""",
    re.VERBOSE,
)


def parse_complex(text: str) -> complex:
    """Parse `a+bi` with optional signs and scientific notation.

    Accepts pure reals ("0.5"), pure imaginaries ("i", "-2i", "1e-3i"),
    and full forms ("0.5+0.8660254i").  A trailing j works as well.
    """
    m = _COMPLEX_RE.match(text)
    if not m or (m.group("re") is None and m.group("im") is None):
        raise argparse.ArgumentTypeError(f"cannot parse complex number {text!r}")
    re_part = float(m.group("re")) if m.group("re") else 0.0
    im_txt = m.group("im")
    if im_txt is None:
        im_part = 0.0
    else:
        body = im_txt[:-1]
        if body in ("", "+"):
            im_part = 1.0
        elif body == "-":
            im_part = -1.0
        else:
            im_part = float(body)
    return complex(re_part, im_part)


def parse_grid(text: str) -> tuple[int, int]:
    m = re.match(r"^(\d+)[xX](\d+)$", text.strip())
    if not m:
        raise argparse.ArgumentTypeError(f"grid must look like 40x40, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def parse_region(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"region must be re0,im0,re1,im1 with four numbers, got {text!r}")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return vals


def _fmt_float(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return f"{x:.16e}"


def _canonical(obj, out: io.StringIO) -> None:
    if obj is None:
        out.write("null")
    elif isinstance(obj, bool):
        out.write("true" if obj else "false")
    elif isinstance(obj, int):
        out.write(str(obj))
    elif isinstance(obj, float):
        out.write(_fmt_float(obj))
    elif isinstance(obj, complex):
        _canonical({"re": obj.real, "im": obj.imag}, out)
    elif isinstance(obj, str):
        out.write('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, dict):
        out.write("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.write(",")
            _canonical(str(key), out)
            out.write(":")
            _canonical(obj[key], out)
        out.write("}")
    elif isinstance(obj, (list, tuple)):
        out.write("[")
        for i, item in enumerate(obj):
            if i:
                out.write(",")
            _canonical(item, out)
        out.write("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def canonical_json(obj) -> str:
    buf = io.StringIO()
    _canonical(obj, buf)
    return buf.getvalue()


_CONFIG_FIELDS = ("command", "tau", "tolerances", "grid", "output_format", "output_path")


@dataclass(frozen=True)
class RunConfig:
    """The resolved inputs of one CLI invocation.

    Serializes round trip stable through to_dict/from_dict; from_dict
    rejects unknown fields so stored configs cannot silently drift.
    """

    command: str
    tau: complex | None = None
    tolerances: dict | None = None
    grid: tuple[int, int] | None = None
    output_format: str = "json"
    output_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "tau": None if self.tau is None else {"re": self.tau.real, "im": self.tau.imag},
            "tolerances": self.tolerances,
            "grid": None if self.grid is None else [self.grid[0], self.grid[1]],
            "output_format": self.output_format,
            "output_path": self.output_path,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(_CONFIG_FIELDS)
        if unknown:
            raise ValueError(f"unknown RunConfig fields: {sorted(unknown)}")
        tau = data.get("tau")
        if isinstance(tau, dict):
            tau = complex(tau["re"], tau["im"])
        grid = data.get("grid")
        if grid is not None:
            grid = (int(grid[0]), int(grid[1]))
        return cls(
            command=data["command"],
            tau=tau,
            tolerances=data.get("tolerances"),
            grid=grid,
            output_format=data.get("output_format", "json"),
            output_path=data.get("output_path"),
        )


def _hessian_dict(h) -> dict:
    return {"gxx": h.xx, "gxy": h.xy, "gyy": h.yy,
            "det": h.det, "trace": h.trace}


def _point_dict(p) -> dict:
    return {
        "t": p.coords.t,
        "s": p.coords.s,
        "z": p.z,
        "kind": p.kind.value,
        "morse": p.morse.value,
        "hessian": _hessian_dict(p.hessian),
        "green_rel": p.g_rel,
    }


def _cmd_eval(args) -> tuple[dict, dict]:
    torus = make_torus(args.tau)
    ev = green.evaluate(args.z, torus)
    detail = green.green_constant_detail(torus)
    results = {
        "z": args.z,
        "green_rel": ev.value_rel,
        "green_abs": ev.value_rel + detail.value,
        "constant": detail.value,
        "grad": {"gx": ev.grad[0], "gy": ev.grad[1]},
        "hessian": _hessian_dict(ev.hessian),
        "gradient_norm": math.hypot(ev.grad[0], ev.grad[1]),
    }
    diagnostics = {
        "constant_error_bound": detail.error_bound,
        "constant_nodes": detail.nodes,
    }
    return results, diagnostics


def _cmd_critical(args) -> tuple[dict, dict]:
    torus = make_torus(args.tau)
    cs = critical.find_critical_points(torus, tol=args.tol)
    results = {
        "count": cs.total_count,
        "points": [_point_dict(p) for p in cs.points],
        "tolerance": args.tol,
    }
    comparison = critical.compare_half_periods(torus)
    diagnostics = {
        "half_period_ranking": [list(group) for group in comparison.ranking],
        "ranking_ties": list(comparison.ties),
        "formula_deviation": comparison.max_formula_deviation,
        "tie_tolerance": comparison.tie_tol,
    }
    return results, diagnostics


def _cmd_scan(args) -> tuple[dict, dict]:
    nx, ny = args.grid
    cells = moduli.scan(args.region, nx, ny)
    edges = moduli.flip_edges(cells, nx, ny)
    results = {
        "region": list(args.region),
        "nx": nx,
        "ny": ny,
        "cells": [
            {
                "tau": c.tau,
                "count": c.count,
                "extra_t": None if c.extra_point is None else c.extra_point.t,
                "extra_s": None if c.extra_point is None else c.extra_point.s,
                "error": c.error,
            }
            for c in cells
        ],
        "flip_edges": [
            {
                "tau_low": e.tau_low,
                "tau_high": e.tau_high,
                "midpoint": e.midpoint,
                "count_low": e.count_low,
                "count_high": e.count_high,
                "degenerate_half_period": e.degenerate_half_period,
                "min_abs_det": e.min_abs_det,
            }
            for e in edges
        ],
    }
    n_err = sum(1 for c in cells if c.error is not None)
    diagnostics = {"error_cells": n_err, "counts_seen": sorted({c.count for c in cells if c.error is None})}
    return results, diagnostics


def _scan_csv(args) -> str:
    nx, ny = args.grid
    cells = moduli.scan(args.region, nx, ny)
    lines = ["re_tau,im_tau,count,extra_t,extra_s"]
    for c in cells:
        et = "" if c.extra_point is None else f"{c.extra_point.t:.16e}"
        es = "" if c.extra_point is None else f"{c.extra_point.s:.16e}"
        lines.append(f"{c.tau.real:.16e},{c.tau.imag:.16e},{c.count},{et},{es}")
    return "\n".join(lines) + "\n"


def _cmd_thresholds(args) -> tuple[dict, dict]:
    rep = moduli.thresholds(tol=args.tol)
    results = {
        "b0": rep.b0,
        "b1": rep.b1,
        "residual_b0": rep.residual_b0,
        "residual_b1": rep.residual_b1,
        "tolerance": args.tol,
    }
    diagnostics = {"bracket_width": rep.bracket_width}
    return results, diagnostics


def _cmd_inequalities(args) -> tuple[dict, dict]:
    if args.b is not None:
        grid = [args.b]
    else:
        grid = [0.1 + 0.05 * k for k in range(59)]
    rep = moduli.verify_fundamental_inequalities(grid)
    results = {
        "n_points": len(rep.rows),
        "violations": list(rep.violations),
        "ok": rep.ok,
        "max_bridge_gap_slope": max(r.bridge_gap_slope for r in rep.rows),
        "max_bridge_gap_theta3": max(r.bridge_gap_theta3 for r in rep.rows),
    }
    diagnostics = {
        "b_first": grid[0],
        "b_last": grid[-1],
        "functional_equation_half": moduli.functional_equation_residual(0.5),
    }
    return results, diagnostics


def _cmd_mfe(args) -> tuple[dict, dict]:
    torus = make_torus(args.tau)
    if args.rho == "8pi":
        z0 = mfe.extra_branch_point(torus)
        sol = mfe.solution_8pi(torus, z0, lam=args.lam)
        diag_extra = {}
    else:
        sol = mfe.solution_4pi(torus)
        d = mfe.four_pi_diagnostics(torus)
        diag_extra = {
            "period_integral_g": d.period_integral,
            "c_prime": d.c_prime,
            "c_tau": d.c_tau,
        }
    nx = args.grid[0] if args.grid else 64
    rep = mfe.verify_solution(sol, grid_n=nx, excl_radius=args.exclusion_radius)
    results = {
        "rho": sol.rho,
        "lambda": sol.lam,
        "c1": sol.c1,
        "branch": sol.branch,
        "max_residual": rep.max_residual,
        "mean_residual": rep.mean_residual,
        "periodicity_1": rep.periodicity_1,
        "periodicity_tau": rep.periodicity_tau,
        "total_mass": rep.total_mass,
        "grid_n": rep.grid_n,
        "stencil_h": rep.h,
        "exclusion_radius": rep.excl_radius,
    }
    diagnostics = {
        "literal_max_residual": rep.literal_max_residual,
        "n_points": rep.n_points,
        **diag_extra,
    }
    return results, diagnostics


def _cmd_selftest(args) -> tuple[dict, dict]:
    rep = selftest.run_all(n_samples=args.samples)
    results = {
        "ok": rep.ok,
        "checks": [
            {
                "name": c.name,
                "max_residual": c.max_residual,
                "tolerance": c.tolerance,
                "n_samples": c.n_samples,
                "ok": c.ok,
            }
            for c in rep.checks
        ],
    }
    if not rep.ok:
        failed = [c.name for c in rep.checks if not c.ok]
        raise Unconverged(f"selftest failures: {', '.join(failed)}")
    return results, {}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class UsageError(Exception):
    pass


def build_parser() -> _Parser:
    parser = _Parser(prog="torusgreen", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", metavar="command")

    def common(p, tau=False, tol=None):
        if tau:
            p.add_argument("--tau", type=parse_complex, required=True,
                           help="modulus a+bi with b > 0")
        if tol is not None:
            p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("eval", help="Green function value, gradient, Hessian at a point")
    common(p, tau=True)
    p.add_argument("--z", type=parse_complex, required=True, help="evaluation point a+bi")

    p = sub.add_parser("critical", help="find and classify all critical points")
    common(p, tau=True, tol=1e-12)

    p = sub.add_parser("scan", help="count critical points over a moduli rectangle")
    common(p)
    p.add_argument("--region", type=parse_region, required=True,
                   metavar="re0,im0,re1,im1")
    p.add_argument("--grid", type=parse_grid, default=(40, 40), metavar="NXxNY")

    p = sub.add_parser("thresholds", help="degeneracy thresholds b0, b1 on the rhombic line")
    common(p, tol=1e-12)

    p = sub.add_parser("inequalities", help="verify the fundamental modular inequalities")
    common(p)
    p.add_argument("--b", type=float, default=None,
                   help="single b value (default: the 0.1..3.0 grid)")

    p = sub.add_parser("mfe", help="construct and verify a mean field equation solution")
    common(p, tau=True)
    p.add_argument("--rho", choices=("4pi", "8pi"), required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0,
                   help="scaling parameter (8pi only)")
    p.add_argument("--grid", type=parse_grid, default=None, metavar="NXxNY",
                   help="verification grid (default 64x64)")
    p.add_argument("--exclusion-radius", type=float, default=0.05)

    p = sub.add_parser("selftest", help="run the identity suites of every module")
    common(p)
    p.add_argument("--samples", type=int, default=200)

    return parser


_HANDLERS = {
    "eval": _cmd_eval,
    "critical": _cmd_critical,
    "scan": _cmd_scan,
    "thresholds": _cmd_thresholds,
    "inequalities": _cmd_inequalities,
    "mfe": _cmd_mfe,
    "selftest": _cmd_selftest,
}


def _config_from_args(args) -> RunConfig:
    tolerances = {}
    if hasattr(args, "tol"):
        tolerances["tol"] = args.tol
    if hasattr(args, "exclusion_radius"):
        tolerances["exclusion_radius"] = args.exclusion_radius
    grid = getattr(args, "grid", None)
    return RunConfig(
        command=args.command,
        tau=getattr(args, "tau", None),
        tolerances=tolerances or None,
        grid=grid,
        output_format=args.format,
        output_path=args.out,
    )


def _inputs_dict(args) -> dict:
    cfg = _config_from_args(args)
    inputs = cfg.to_dict()
    for extra in ("z", "b", "region", "rho", "lam", "samples"):
        if hasattr(args, extra):
            val = getattr(args, extra)
            key = "lambda" if extra == "lam" else extra
            if isinstance(val, tuple):
                val = list(val)
            inputs[key] = val
    return inputs


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    if args.format == "csv" and args.command != "scan":
        sys.stderr.write("usage error: --format csv is only available for scan\n")
        return EXIT_USAGE
    try:
        if args.command == "scan" and args.format == "csv":
            _write_output(_scan_csv(args), args.out)
            return EXIT_OK
        results, diagnostics = _HANDLERS[args.command](args)
        report = {
            "schema_version": SCHEMA_VERSION,
            "command": args.command,
            "inputs": _inputs_dict(args),
            "results": results,
            "diagnostics": diagnostics,
        }
        _write_output(canonical_json(report) + "\n", args.out)
        return EXIT_OK
    except _CONSISTENCY_ERRORS as exc:
        sys.stderr.write(f"CONSISTENCY VIOLATION ({type(exc).__name__}): {exc}\n")
        return EXIT_INCONSISTENT
    except _DOMAIN_ERRORS as exc:
        sys.stderr.write(f"domain error ({type(exc).__name__}): {exc}\n")
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
