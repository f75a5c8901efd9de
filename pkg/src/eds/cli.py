"""Command-line front end: ``eds <subcommand> [options]``.

Exit codes: 0 on success, 1 on domain errors (degenerate point, wrong type,
failed cross-check), 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

from . import cartan
from .errors import (
    ChartMismatchError,
    EDSError,
    InputError,
    NonPolynomialError,
    UnboundVariableError,
)
from .exterior import DForm, interior, reduce_mod
from .jetclassify import (
    SolvedSystem,
    build_chart,
    classification_report,
    fiber_at,
    regularity_check,
    transversal_fiber,
)
from .pfaffian import (
    PfaffSystem,
    annihilator_agrees,
    bracket_compatible,
    cauchy_char,
    growth_at,
    weak_flag,
)
from .prolong import NONTRANSVERSAL, TRANSVERSAL, derived_matches_pullback, prolong, stratify, tower, transition_check
from .symbolalg import chart_symbol, filtration_compatible, match_model, symbol_frame
from .symcore import as_expr

BUILTIN_SYSTEMS = {
    "cartan": {"solved": {"r": "t^3/3", "s": "t^2/2"}, "parameter": "t"},
    "type2": {"solved": {"r": "0", "t": "0"}, "parameter": "s"},
    "type3": {"solved": {"r": "t", "s": "0"}, "parameter": "t"},
    "type4": {"solved": {"r": "q", "s": "0"}, "parameter": "t"},
}

UNIT_POINT = {"x": 0, "y": 0, "z": 0, "p": 0, "q": 0, "t": 1}


# --------------------------------------------------------------------------
# input handling
# --------------------------------------------------------------------------

def _load_json(arg: str):
    """Inline JSON (starting with ``{`` or ``[``) or a path to a UTF-8 JSON file."""
    text = arg.strip()
    if not text.startswith(("{", "[")):
        try:
            text = Path(arg).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read {arg}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {arg}: {exc.msg} at position {exc.pos}") from None


def _rational(v) -> Fraction:
    if isinstance(v, bool):
        raise InputError(f"not a rational number: {v!r}")
    try:
        return Fraction(v) if not isinstance(v, float) else Fraction(str(v))
    except (ValueError, TypeError, ZeroDivisionError):
        raise InputError(f"not a rational number: {v!r}") from None


def load_points(arg: str | None, default: Sequence[Mapping] = (UNIT_POINT,)) -> list:
    data = list(default) if arg is None else _load_json(arg)
    if isinstance(data, Mapping):
        data = [data]
    if not isinstance(data, list) or not all(isinstance(p, Mapping) for p in data):
        raise InputError("points must be a JSON object or a list of objects")
    return [{k: _rational(v) for k, v in p.items()} for p in data]


def load_solved(arg: str) -> SolvedSystem:
    data = BUILTIN_SYSTEMS[arg] if arg in BUILTIN_SYSTEMS else _load_json(arg)
    return SolvedSystem.from_json(data)


def load_pfaff(arg: str) -> PfaffSystem:
    """A solved system, the builtin ``db``, or a JSON list of serialized 1-forms."""
    if arg == "db":
        return cartan.db_system()
    data = BUILTIN_SYSTEMS[arg] if arg in BUILTIN_SYSTEMS else _load_json(arg)
    if isinstance(data, Mapping) and "solved" in data:
        return build_chart(SolvedSystem.from_json(data)).pfaff
    if isinstance(data, Mapping) and "generators" in data:
        data = [dict(g, coords=g.get("coords", data.get("coords"))) for g in data["generators"]]
    if not isinstance(data, list) or not data:
        raise InputError("system must be a solved-system object or a non-empty list of 1-forms")
    try:
        forms = [DForm.from_json(f) for f in data]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"malformed form serialization: {exc}") from None
    chart = forms[0].chart
    if any(f.chart != chart or f.degree != 1 for f in forms):
        raise InputError("all generators must be 1-forms on the same coordinates")
    return PfaffSystem(chart, forms)


class ReportedFailure(EDSError):
    """Domain failure that still produces a report on standard output."""

    def __init__(self, message: str, report: Mapping):
        self.report = report
        super().__init__(message)


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    """Map in input order, optionally on a thread pool."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _point_json(pt: Mapping) -> dict:
    return {k: str(v) for k, v in sorted(pt.items())}


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_classify(args) -> dict:
    sys_ = load_solved(args.system)
    R = build_chart(sys_)
    pts = load_points(args.points)
    crank = cauchy_char(R.pfaff).rank

    def one(pt):
        return dict(classification_report(R, pt, cauchy_rank=crank), point=_point_json(pt))

    out = {"system": sys_.to_json(), "reports": _pmap(one, pts, args.jobs)}
    if args.verify:
        Rs = build_chart(sys_.swap_xy())
        swap = [classification_report(Rs, _swap_point(pt), cauchy_rank=crank)["type"] for pt in pts]
        reg = regularity_check(sys_, pts)
        out["verify"] = {
            "regular": bool(reg["point_ranks"]) and all(r == 2 for r in reg["point_ranks"]),
            "swap_invariant": swap == [r["type"] for r in out["reports"]],
        }
    bad = [i for i, r in enumerate(out["reports"]) if r["type"] == "Degenerate"]
    if bad:
        raise ReportedFailure(f"degenerate point(s) at index {bad}", out)
    return out


def _swap_point(pt: Mapping) -> dict:
    m = {"x": "y", "y": "x", "p": "q", "q": "p", "r": "t", "t": "r"}
    return {m.get(k, k): v for k, v in pt.items()}


def cmd_fiber(args) -> dict:
    R = build_chart(load_solved(args.system))
    pts = load_points(args.points)
    fibers = _pmap(lambda pt: fiber_at(R, pt), pts, args.jobs)
    out = {"fibers": [dict(f.to_json(), point=_point_json(pt)) for f, pt in zip(fibers, pts)]}
    if args.verify:
        out["verify"] = {"transversal_fiber_consistent": all(
            transversal_fiber(R, pt) == f.transversal_fiber for f, pt in zip(fibers, pts))}
    return out


def max_depth() -> int:
    raw = os.environ.get("EDS_MAX_DEPTH", "3")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"EDS_MAX_DEPTH must be an integer, got {raw!r}") from None


def cmd_prolong(args) -> dict:
    cap = max_depth()
    if args.depth < 1 or args.depth > cap:
        raise InputError(f"--depth must be between 1 and {cap} (EDS_MAX_DEPTH)")
    R = build_chart(load_solved(args.system))
    P = prolong(R)
    out = P.to_json()
    if args.depth > 1:
        if P.trivial is not None:
            raise EDSError("tower needs a pencil fiber; this system has a trivial prolongation")
        out["tower"] = [{"level": lv.level, "charts": [c.path for c in lv.charts],
                         "fiber_kernel_dims": lv.fiber_dims}
                        for lv in tower(R, args.depth, seed=args.seed)]
    if args.verify and P.trivial is None:
        out["verify"] = {
            "coframe": P.coframe.verify(),
            "transitions": [bool(transition_check(tr)["ok"]) for tr in P.transitions],
            "derived_matches_pullback": [derived_matches_pullback(c) for c in P.charts],
        }
    return out


def cmd_symbol(args) -> dict:
    R = build_chart(load_solved(args.system))
    P = prolong(R)
    if P.trivial is not None:
        raise EDSError("symbol algebra needs a type I system")
    if args.chart == "sigma0":
        ch, stratum, fiber_default = P.chart(TRANSVERSAL), "Σ0", 1
    else:
        ch, stratum, fiber_default = P.chart(NONTRANSVERSAL), "Σ1", 0
    pts = load_points(args.point, default=(dict(UNIT_POINT),))
    if len(pts) != 1:
        raise InputError("--point takes a single point")
    pt = dict(pts[0])
    pt.setdefault(ch.fiber, Fraction(fiber_default))
    missing = [c for c in ch.chart.coords if c not in pt]
    if missing:
        raise InputError(f"point is missing coordinates {missing}")
    found = stratify(ch, pt)
    if found != stratum:
        raise EDSError(f"point lies on {found}, not {stratum}")
    g = chart_symbol(ch, pt)
    m = match_model(g)
    rep = g.to_json()
    out = {
        "chart": ch.path,
        "stratum": stratum,
        "point": _point_json(pt),
        "dims": rep["dims"],
        "brackets": rep["brackets"],
        "generating": m.generating,
        "model": m.model,
        "k": m.k,
        "table_match": m.table_ok,
        "signs": list(m.signs) if m.signs else None,
    }
    if args.verify:
        out["verify"] = {
            "jacobi": g.jacobi_ok(),
            "grading": g.grading_ok(),
            "filtration_compatible": filtration_compatible(symbol_frame(ch)),
        }
    return out


def cmd_cauchy(args) -> dict:
    S = load_pfaff(args.system)
    C = cauchy_char(S)
    out = {"coords": list(S.chart.coords), "cauchy": C.to_json()}
    if args.verify:
        ok = all(S.contains_field(V) for V in C.fields) and all(
            reduce_mod(interior(V, g.d()), S.generators).is_zero for V in C.fields for g in S.generators)
        out["verify"] = {"characteristic": ok}
    return out


def cmd_growth(args) -> dict:
    S = load_pfaff(args.system)
    flag = weak_flag(S)
    pts = load_points(args.points, default=())
    for pt in pts:
        missing = [c for c in S.chart.coords if c not in pt]
        if missing:
            raise InputError(f"point is missing coordinates {missing}")
    growth = _pmap(lambda pt: list(growth_at(flag, pt).ranks), pts, args.jobs)
    out = {"coords": list(S.chart.coords), "flag": flag.to_json(),
           "growth": [{"point": _point_json(pt), "ranks": g} for pt, g in zip(pts, growth)]}
    if args.verify:
        out["verify"] = {"bracket_compatible": bracket_compatible(flag), "annihilator_agrees": annihilator_agrees(S)}
    return out


def cmd_cartan_solve(args) -> dict:
    if args.method == "i":
        if args.phi is not None:
            raise InputError("--phi belongs to --method ii")
        S = cartan.solve_i(as_expr(args.y0 if args.y0 is not None else "0"))
    else:
        if args.y0 is not None:
            raise InputError("--y0 belongs to --method i")
        S = cartan.solve_ii(as_expr(args.phi if args.phi is not None else "0"))
    checks = None
    if args.verify:
        rep = cartan.verify_solution(S)
        checks = {k: rep[k] for k in ("pullbacks_zero", "nonimmersion_locus", "through_origin",
                                      "locus_principal", "immersion_at_samples")}
    return S.to_json(checks)


def cmd_cartan_compare(args) -> dict:
    y0 = as_expr(args.y0)
    return {"y0": str(y0), "equal": cartan.compare_solutions(y0)}


# --------------------------------------------------------------------------
# rendering and entry point
# --------------------------------------------------------------------------

def render(report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False)
    lines: list = []
    _flatten(report, "", lines)
    return "\n".join(lines)


def _flatten(obj, prefix: str, out: list) -> None:
    if isinstance(obj, Mapping):
        for k in sorted(obj):
            _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k), out)
    elif isinstance(obj, list) and any(isinstance(v, (Mapping, list)) for v in obj):
        for i, v in enumerate(obj):
            _flatten(v, f"{prefix}[{i}]", out)
    else:
        out.append(f"{prefix}: {json.dumps(obj, ensure_ascii=False) if not isinstance(obj, str) else obj}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--verify", action="store_true", help="embed internal cross-checks")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for point lists")

    parser = argparse.ArgumentParser(prog="eds", description="Exterior differential systems toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def system_arg(p, default="cartan"):
        p.add_argument("--system", default=default,
                       help=f"JSON file, inline JSON or builtin ({', '.join(BUILTIN_SYSTEMS)})")

    p = sub.add_parser("classify", parents=[common], help="classify a system at points")
    system_arg(p)
    p.add_argument("--points")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fiber", parents=[common], help="integral elements at points")
    system_arg(p)
    p.add_argument("--points")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("prolong", parents=[common], help="rank 2 prolongation and tower")
    system_arg(p)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_prolong)

    p = sub.add_parser("symbol", parents=[common], help="symbol algebra on a stratum")
    system_arg(p)
    p.add_argument("--chart", choices=("sigma0", "sigma1"), default="sigma0")
    p.add_argument("--point")
    p.set_defaults(func=cmd_symbol)

    p = sub.add_parser("cauchy", parents=[common], help="Cauchy characteristics")
    system_arg(p)
    p.set_defaults(func=cmd_cauchy)

    p = sub.add_parser("growth", parents=[common], help="weak derived flag and growth vectors")
    system_arg(p)
    p.add_argument("--points")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("cartan", help="singular solutions of the Cartan system")
    csub = p.add_subparsers(dest="cartan_command", required=True)
    q = csub.add_parser("solve", parents=[common])
    q.add_argument("--method", choices=("i", "ii"), default="i")
    q.add_argument("--y0")
    q.add_argument("--phi")
    q.set_defaults(func=cmd_cartan_solve)
    q = csub.add_parser("compare", parents=[common])
    q.add_argument("--y0", required=True)
    q.set_defaults(func=cmd_cartan_compare)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        report = args.func(args)
    except (InputError, NonPolynomialError, UnboundVariableError, ChartMismatchError) as exc:
        print(f"eds: input error: {exc}", file=stderr)
        return 2
    except ReportedFailure as exc:
        print(render(exc.report, args.format), file=stdout)
        print(f"eds: {exc}", file=stderr)
        return 1
    except EDSError as exc:
        print(f"eds: {exc}", file=stderr)
        return 1
    print(render(report, args.format), file=stdout)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
