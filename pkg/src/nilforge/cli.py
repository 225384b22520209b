"""Command-line front end.

Exit codes: 0 all queries passed, 1 a check failed or errored, 2 the
workspace did not load (syntax or semantic error), 3 a query was undefined.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources

from nilforge import __version__
from nilforge.dsl import ParseError, Query, SemanticError, load_workspace, parse_form_in, parse_workspace
from nilforge.errors import NilforgeError
from nilforge.reports import Report, document, exit_code, run_queries

FIXTURES = ("n6.dga", "m8.dga", "rho.dga", "massey_prop4.dga")

EXIT_LOAD = 2


def bundled_fixture(name: str) -> str:
    return resources.files("nilforge").joinpath("fixtures", name).read_text(encoding="utf-8")


def _summary(r: Report) -> str:
    p = r.payload
    if "error" in p:
        return p["error"]
    bits = []
    for key in ("betti", "dimension", "count", "verdict", "top_multiple", "trivial", "zero", "orbifold", "alternating", "d", "survivors", "top_power", "headline"):
        if key in p and p[key] is not None:
            bits.append(f"{key}={json.dumps(p[key]) if not isinstance(p[key], str) else p[key]}")
    if "value" in p:
        bits.append(f"value={p['value']['representative']}")
    if "checks" in p:
        bits.append(", ".join(f"{c['check']}: {'ok' if c['passed'] else 'FAILED'}" for c in p["checks"]))
    if "forms" in p and isinstance(p["forms"], list):
        bits.append(f"{len(p['forms'])} form(s)")
    if "conditions" in p:
        bits.append(" ".join(f"[{'x' if c['passed'] else ' '}] {c['name']}" for c in p["conditions"]))
    return "; ".join(bits)


def emit(args, workspace: str, reports) -> int:
    code = exit_code(reports)
    if args.json:
        print(json.dumps(document(workspace, reports), indent=2, sort_keys=False))
    elif not args.quiet:
        for r in reports:
            print(f"{r.status.upper():9} {r.name}: {_summary(r)}")
    return code


def load_error(args, workspace: str, exc: Exception) -> int:
    if args.json:
        err = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ParseError):
            err.update(file=exc.file, line=exc.line, column=exc.column, expected=exc.expected, found=exc.found)
        print(json.dumps({"version": 1, "workspace": workspace, "error": err, "queries": []}, indent=2))
    else:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_LOAD


def _common(p: argparse.ArgumentParser, workspace=True):
    if workspace:
        p.add_argument("workspace", help="path to a .dga workspace file")
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--quiet", action="store_true", help="print nothing; rely on the exit code")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nilforge", description="Exact Chevalley-Eilenberg computations on .dga workspaces.")
    ap.add_argument("--version", action="version", version=f"nilforge {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every query declared in the workspace")
    _common(p)

    p = sub.add_parser("check", help="d^2 = 0, action and group-law verification")
    _common(p)
    p.add_argument("--algebra")
    p.add_argument("--invariant", help="cyclic action (a morphism with an order)")
    p.add_argument("--action", help="torus action")
    p.add_argument("--law", help="group law")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    for name, needs_degree in (("betti", False), ("cohomology", True)):
        p = sub.add_parser(name, help=f"{name} of an algebra or its invariant subcomplex")
        _common(p)
        p.add_argument("--algebra", required=True)
        p.add_argument("--invariant")
        if needs_degree:
            p.add_argument("--degree", type=int, required=True)

    for name, n in (("cup", 2), ("massey3", 3), ("massey-system", None), ("massey4-cert", 4)):
        p = sub.add_parser(name, help=f"{name} on classes given as form expressions")
        _common(p)
        p.add_argument("--algebra", required=True)
        p.add_argument("--invariant")
        p.add_argument("--classes", nargs=n if n else "+", required=True, metavar="FORM")
        if name == "massey-system":
            p.add_argument("--arity", type=int)
        if name == "massey4-cert":
            p.add_argument("--sigma", required=True, metavar="FORM")

    p = sub.add_parser("fixed-points", help="fixed points of a torus action")
    _common(p)
    p.add_argument("--action", required=True)

    p = sub.add_parser("euler", help="alternating sum and orbifold Euler characteristic")
    _common(p)
    p.add_argument("--algebra")
    p.add_argument("--invariant")
    p.add_argument("--action")
    p.add_argument("--chi", type=int)

    p = sub.add_parser("reproduce-paper", help="run every claim encoded in the bundled fixtures")
    _common(p, workspace=False)
    return ap


def _query_from_args(ws, args) -> Query:
    params: dict = {}
    for key in ("algebra", "invariant", "action", "law"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    for key in ("degree", "arity", "chi"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    if args.command == "check":
        params["samples"] = args.samples
        params["seed"] = args.seed
    if getattr(args, "classes", None):
        params["classes"] = [parse_form_in(ws, args.algebra, t) for t in args.classes]
    if getattr(args, "sigma", None):
        params["sigma"] = [parse_form_in(ws, args.algebra, args.sigma)]
    return Query(args.command, args.command, params)


def _validate_refs(ws, q: Query):
    tables = {"algebra": ws.algebras, "invariant": ws.orders, "action": ws.torus_actions, "law": ws.laws}
    for key, table in tables.items():
        if key in q.params and q.params[key] not in table:
            raise SemanticError(f"unknown {key} {q.params[key]!r}", ws.file)


def _headline(reports) -> Report:
    """Collect the headline numbers from the individual fixture reports."""
    by_name = {r.name: r for r in reports}
    try:
        head = {
            "b2(M)": by_name["m8/mBetti"].payload["betti"][2],
            "chi(M)": by_name["m8/mBetti"].payload["euler"],
            "b4(M/Z3)": by_name["rho/invBetti"].payload["betti"][4],
            "chi(M/Z3)": by_name["rho/orbifoldChi"].payload["orbifold"],
            "fixed_points": by_name["rho/allPoints"].payload["count"],
            "certificate": by_name["massey_prop4/quadCert"].payload["verdict"],
            "top_multiple": by_name["massey_prop4/quadCert"].payload["top_multiple"],
        }
    except KeyError as exc:
        return Report("summary", "error", {"error": f"missing result {exc}"})
    ok = all(r.status == "pass" for r in reports)
    return Report("summary", "pass" if ok else "fail", {"headline": head})


def reproduce(args) -> int:
    reports = []
    for name in FIXTURES:
        ws = parse_workspace(bundled_fixture(name), name)
        for r in run_queries(ws):
            r.name = f"{name[:-4]}/{r.name}"
            reports.append(r)
    reports.append(_headline(reports))
    return emit(args, "bundled fixtures", reports)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "reproduce-paper":
        try:
            return reproduce(args)
        except (ParseError, SemanticError) as exc:
            return load_error(args, "bundled fixtures", exc)
    try:
        ws = load_workspace(args.workspace)
    except OSError as exc:
        return load_error(args, args.workspace, exc)
    except (ParseError, SemanticError) as exc:
        return load_error(args, args.workspace, exc)
    if args.command == "run":
        return emit(args, args.workspace, run_queries(ws))
    try:
        q = _query_from_args(ws, args)
        _validate_refs(ws, q)
    except (ParseError, SemanticError) as exc:
        return load_error(args, args.workspace, exc)
    except NilforgeError as exc:
        return load_error(args, args.workspace, exc)
    return emit(args, args.workspace, run_queries(ws, [q], threads=1))


if __name__ == "__main__":
    sys.exit(main())
