"""Query execution and JSON-ready reports."""

from __future__ import annotations

import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from nilforge.cdga import CohomologyClass, verify_d2
from nilforge.dsl import Query, SemanticError, Workspace
from nilforge.errors import MasseyUndefinedError, NilforgeError
from nilforge.exterior import format_terms
from nilforge.lattice import fixed_points, group_law_check, orbifold_euler
from nilforge.massey import massey_degree_scan, massey_value, quad_nontriv_certificate, solve_defining_system, triple_massey
from nilforge.scalar import scalar_to_str
from nilforge.symmetry import fixed_cohomology_dimension, invariant_complex, verify_action

SCHEMA_VERSION = 1
STATUSES = ("pass", "fail", "undefined", "error")


@dataclass
class Report:
    name: str
    status: str
    payload: dict = dc_field(default_factory=dict)
    ms: float = 0.0

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "payload": self.payload, "ms": round(self.ms, 3)}


def class_json(c: CohomologyClass) -> dict:
    return {
        "degree": c.degree,
        "coords": [scalar_to_str(x) for x in c.coords],
        "representative": format_terms(c.representative),
    }


class Session:
    """Caches invariant complexes so parallel queries share the expensive work."""

    def __init__(self, ws: Workspace):
        self.ws = ws
        self._lock = threading.Lock()
        self._complexes: dict = {}

    def complex(self, params: dict):
        A = self.ws.algebra(params["algebra"])
        inv = params.get("invariant")
        if inv is None:
            return A
        with self._lock:
            key = (params["algebra"], inv)
            if key not in self._complexes:
                act = self.ws.cyclic_action(inv)
                if act.algebra is not A:
                    raise SemanticError(f"action {inv!r} is not defined on algebra {params['algebra']!r}")
                self._complexes[key] = invariant_complex(A, act, f"{params['algebra']}^{inv}")
            return self._complexes[key]


def _need(q: Query, *keys):
    for k in keys:
        if k not in q.params:
            raise SemanticError(f"query {q.name!r} ({q.kind}) needs parameter {k!r}")


def _expect(q: Query):
    return q.params.get("expect")


def _run_check(s: Session, q: Query):
    p = q.params
    checks = []
    names = [p["algebra"]] if "algebra" in p else list(s.ws.algebras)
    for a in names:
        r = verify_d2(s.ws.algebras[a])
        checks.append({"check": f"d2 {a}", "passed": r.passed, "violations": r.violations})
    if "invariant" in p:
        act = s.ws.cyclic_action(p["invariant"])
        r = verify_action(act.algebra, act)
        checks.append({"check": f"action {p['invariant']}", "passed": r.passed, "violations": r.violations})
    if "action" in p:
        r = s.ws.torus_actions[p["action"]].verify()
        checks.append({"check": f"torus action {p['action']}", "passed": r.passed, "violations": r.violations})
    if "law" in p:
        r = group_law_check(s.ws.laws[p["law"]], p.get("samples", 100), p.get("seed", 0))
        checks.append(
            {"check": f"group law {p['law']}", "passed": r.passed, "violations": r.violations[:10], "counts": r.details.get("passed")}
        )
    ok = all(c["passed"] for c in checks)
    return ("pass" if ok else "fail"), {"checks": checks}


def _run_betti(s: Session, q: Query):
    _need(q, "algebra")
    C = s.complex(q.params)
    betti = C.betti()
    payload = {"algebra": q.params["algebra"], "betti": betti, "euler": C.euler()}
    ok = True
    if "invariant" in q.params:
        act = s.ws.cyclic_action(q.params["invariant"])
        fixed = [fixed_cohomology_dimension(act.algebra, act, k) for k in range(len(betti))]
        payload["invariant"] = q.params["invariant"]
        payload["fixed_cohomology"] = fixed
        payload["paths_agree"] = fixed == betti
        ok = fixed == betti
    exp = _expect(q)
    if exp is not None:
        ok = ok and [int(x) for x in exp] == betti
    return ("pass" if ok else "fail"), payload


def _run_cohomology(s: Session, q: Query):
    _need(q, "algebra", "degree")
    C = s.complex(q.params)
    basis = C.cohomology(q.params["degree"])
    payload = {"degree": q.params["degree"], "dimension": basis.dimension, "classes": [class_json(c) for c in basis.classes()]}
    exp = _expect(q)
    ok = exp is None or [basis.dimension] == [int(x) for x in exp]
    return ("pass" if ok else "fail"), payload


def _classes(s: Session, q: Query, n: int | None = None):
    _need(q, "algebra", "classes")
    forms = q.params["classes"]
    if n is not None and len(forms) != n:
        raise SemanticError(f"query {q.name!r} needs exactly {n} classes, got {len(forms)}")
    C = s.complex(q.params)
    return C, [C.class_of(f) for f in forms]


def _run_cup(s: Session, q: Query):
    C, cls = _classes(s, q, 2)
    c = C.cup(cls[0], cls[1])
    payload = {"class": class_json(c), "zero": c.is_zero()}
    exp = _expect(q)
    ok = exp is None or exp[0] == ("zero" if c.is_zero() else "nonzero")
    return ("pass" if ok else "fail"), payload


def _run_massey3(s: Session, q: Query):
    C, cls = _classes(s, q, 3)
    r = triple_massey(C, *cls)
    payload = {
        "value": class_json(r.value),
        "trivial": r.trivial,
        "indeterminacy": [class_json(c) for c in r.indeterminacy],
        "group_dimension": C.cohomology(r.value.degree).dimension,
    }
    exp = _expect(q)
    ok = exp is None or exp[0] == ("trivial" if r.trivial else "nontrivial")
    return ("pass" if ok else "fail"), payload


def _run_massey_system(s: Session, q: Query):
    C, cls = _classes(s, q)
    if "arity" in q.params and q.params["arity"] != len(cls):
        raise SemanticError(f"query {q.name!r}: arity {q.params['arity']} but {len(cls)} classes")
    ds = solve_defining_system(C, cls)
    mv = massey_value(ds)
    payload = {
        "arity": ds.t,
        "entries": {f"{i},{j}": format_terms(f) for (i, j), f in sorted(ds.entries.items())},
        "value": class_json(mv.value),
        "zero": mv.value.is_zero(),
    }
    exp = _expect(q)
    ok = not ds.violations() and (exp is None or exp[0] == ("zero" if mv.value.is_zero() else "nonzero"))
    return ("pass" if ok else "fail"), payload


def _run_massey4_cert(s: Session, q: Query):
    C, cls = _classes(s, q, 4)
    _need(q, "sigma")
    cert = quad_nontriv_certificate(C, cls, q.params["sigma"][0])
    payload = {
        "conditions": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in cert.checklist],
        "verdict": cert.verdict,
        "top_multiple": None if cert.top_multiple is None else scalar_to_str(cert.top_multiple),
    }
    if cert.psi is not None:
        payload["psi"] = format_terms(cert.psi)
    exp = _expect(q)
    if exp is None:
        ok = cert.valid
    else:
        ok = exp[0] == cert.verdict
        if len(exp) > 1:
            ok = ok and cert.top_multiple is not None and Fraction(exp[1]) == cert.top_multiple
    return ("pass" if ok else "fail"), payload


def _run_fixed_points(s: Session, q: Query):
    _need(q, "action")
    act = s.ws.torus_actions[q.params["action"]]
    pts = fixed_points(act)
    payload = {"action": q.params["action"], "count": len(pts)}
    payload["points"] = [[scalar_to_str(x) for x in p] for p in pts]
    exp = _expect(q)
    ok = exp is None or int(exp[0]) == len(pts)
    return ("pass" if ok else "fail"), payload


def _run_euler(s: Session, q: Query):
    payload = {}
    values = []
    if "algebra" in q.params:
        C = s.complex(q.params)
        payload["alternating"] = C.euler()
        values.append(Fraction(C.euler()))
    if "action" in q.params:
        act = s.ws.torus_actions[q.params["action"]]
        n = act.order
        if "chi" in q.params:
            chi = q.params["chi"]
        elif "algebra" in q.params:
            chi = s.ws.algebra(q.params["algebra"]).euler()
        else:
            raise SemanticError(f"query {q.name!r} needs 'chi' or 'algebra' for the orbifold formula")
        count = len(fixed_points(act))
        orb = orbifold_euler(chi, n, [n] * count)
        payload.update({"chi": chi, "group_order": n, "fixed_points": count, "orbifold": scalar_to_str(orb)})
        values.append(orb)
    if not values:
        raise SemanticError(f"query {q.name!r} needs 'algebra' or 'action'")
    ok = len(set(values)) == 1
    exp = _expect(q)
    if exp is not None:
        ok = ok and all(v == Fraction(exp[0]) for v in values)
    return ("pass" if ok else "fail"), payload


def _run_degree_scan(s: Session, q: Query):
    _need(q, "algebra")
    C = s.complex(q.params)
    scan = massey_degree_scan(C.betti(), q.params.get("arity", 6))
    payload = {
        "betti": C.betti(),
        "survivors": [[t, list(degs)] for t, degs in scan["survivors"]],
    }
    return "pass", payload


def _forms(q: Query, n: int | None = None):
    _need(q, "algebra", "forms")
    forms = q.params["forms"]
    if n is not None and len(forms) != n:
        raise SemanticError(f"query {q.name!r} needs exactly {n} forms, got {len(forms)}")
    return forms


def _run_d_equals(s: Session, q: Query):
    f, g = _forms(q, 2)
    df = s.ws.algebra(q.params["algebra"]).differential(f)
    return ("pass" if df == g else "fail"), {"d": format_terms(df), "expected": format_terms(g)}


def _run_closed(s: Session, q: Query):
    A = s.ws.algebra(q.params["algebra"])
    rows = [{"form": format_terms(f), "d": format_terms(A.differential(f))} for f in _forms(q)]
    return ("pass" if all(r["d"] == "0" for r in rows) else "fail"), {"forms": rows}


def _run_invariant_form(s: Session, q: Query):
    _need(q, "invariant")
    act = s.ws.cyclic_action(q.params["invariant"])
    rows = []
    for f in _forms(q):
        img = act.generator.apply(f)
        rows.append({"form": format_terms(f), "image": format_terms(img), "invariant": img == f})
    return ("pass" if all(r["invariant"] for r in rows) else "fail"), {"forms": rows}


def _run_symplectic(s: Session, q: Query):
    (f,) = _forms(q, 1)
    A = s.ws.algebra(q.params["algebra"])
    n = A.top_degree
    if f.degree != 2 or n % 2:
        raise SemanticError(f"query {q.name!r}: needs a 2-form on an even-dimensional algebra")
    power = A.unit()
    for _ in range(n // 2):
        power = power.wedge(f)
    closed = not A.differential(f)
    payload = {"closed": closed, "top_power": format_terms(power), "nondegenerate": bool(power)}
    return ("pass" if closed and power else "fail"), payload


RUNNERS = {
    "d-equals": _run_d_equals,
    "closed": _run_closed,
    "invariant-form": _run_invariant_form,
    "symplectic": _run_symplectic,
    "check": _run_check,
    "betti": _run_betti,
    "cohomology": _run_cohomology,
    "cup": _run_cup,
    "massey3": _run_massey3,
    "massey-system": _run_massey_system,
    "massey4-cert": _run_massey4_cert,
    "fixed-points": _run_fixed_points,
    "euler": _run_euler,
    "degree-scan": _run_degree_scan,
}


def run_query(s: Session, q: Query) -> Report:
    start = time.perf_counter()
    try:
        status, payload = RUNNERS[q.kind](s, q)
    except MasseyUndefinedError as exc:
        status, payload = "undefined", {"error": str(exc)}
        cell = getattr(exc, "cell", None)
        if cell is not None:
            payload["cell"] = list(cell)
    except NilforgeError as exc:
        status, payload = "error", {"error": str(exc), "type": type(exc).__name__}
    return Report(q.name, status, payload, (time.perf_counter() - start) * 1000)


def thread_count() -> int:
    raw = os.environ.get("NILFORGE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def run_queries(ws: Workspace, queries=None, threads: int | None = None) -> list:
    """Run queries, possibly in parallel; reports come back in declaration order."""
    queries = list(ws.queries if queries is None else queries)
    s = Session(ws)
    threads = threads or thread_count()
    if threads <= 1 or len(queries) <= 1:
        return [run_query(s, q) for q in queries]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda q: run_query(s, q), queries))


def exit_code(reports) -> int:
    statuses = {r.status for r in reports}
    if statuses & {"fail", "error"}:
        return 1
    if "undefined" in statuses:
        return 3
    return 0


def document(workspace: str, reports) -> dict:
    return {"version": SCHEMA_VERSION, "workspace": workspace, "queries": [r.to_json() for r in reports]}
