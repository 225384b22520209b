"""Triple and higher Massey products, defining systems and non-triviality certificates.

Defining systems follow the convention

    d a(i,j) = sum_{k=i}^{j-1} bar(a(i,k)) ^ a(k+1,j),   bar(x) = (-1)^deg(x) x,

and the value of a t-fold product is the class of
``sum_{k=1}^{t-1} bar(a(1,k)) ^ a(k+1,t)``. For t = 3 this value equals
``(-1)^(p1+p2)`` times the classical ``a1 ^ eta + (-1)^(p1+1) xi ^ a3``.

Only one value of a product of arity >= 4 is ever computed. Non-triviality of
a quadruple product is established by :func:`quad_nontriv_certificate`, a
sufficient test that wedges every possible value with a fixed closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import product as cartesian
from typing import Sequence

from nilforge import linalg
from nilforge.cdga import CochainComplex, CohomologyClass, Subcomplex
from nilforge.errors import (
    DegreeError,
    MasseyUndefinedError,
    NilforgeError,
    NotClosedError,
    ObstructedCellError,
)
from nilforge.exterior import Form, format_terms, wedge
from nilforge.symmetry import FiniteCyclicAction, average


def _as_class(C: CochainComplex, a) -> CohomologyClass:
    if isinstance(a, CohomologyClass):
        if a.complex is not C:
            return C.class_of(a.representative)
        return a
    return C.class_of(a)


def _zero_class(C: CochainComplex, degree: int) -> CohomologyClass:
    basis = C.cohomology(degree)
    return basis.element([0] * basis.dimension)


def _span_basis(classes: Sequence[CohomologyClass], C: CochainComplex, degree: int):
    dim = C.cohomology(degree).dimension
    rows = [list(c.coords) for c in classes if not c.is_zero()]
    r, piv = linalg.rref(rows, dim) if rows else ([], [])
    basis = C.cohomology(degree)
    return [basis.element(row) for row in r], r, piv


@dataclass
class TripleMasseyResult:
    value: CohomologyClass
    indeterminacy: list
    trivial: bool
    xi: Form
    eta: Form
    value_form: Form

    @property
    def degree(self) -> int:
        return self.value.degree


def triple_massey(C: CochainComplex, a1, a2, a3) -> TripleMasseyResult:
    """One value of <a1, a2, a3> plus its indeterminacy a1 H + H a3."""
    a1, a2, a3 = (_as_class(C, a) for a in (a1, a2, a3))
    p1, p2, p3 = a1.degree, a2.degree, a3.degree
    r1, r2, r3 = a1.representative, a2.representative, a3.representative
    for label, x, y in (("a1 u a2", r1, r2), ("a2 u a3", r2, r3)):
        c = C.class_of(wedge(x, y))
        if not c.is_zero():
            raise MasseyUndefinedError(
                f"Massey product undefined: {label} is the nonzero class of {format_terms(wedge(x, y))}"
            )
    xi = C.is_exact_with_preimage(wedge(r1, r2))
    eta = C.is_exact_with_preimage(wedge(r2, r3))
    sign = -1 if (p1 + 1) % 2 else 1
    value_form = wedge(r1, eta) + wedge(xi, r3).scale(sign)
    deg = p1 + p2 + p3 - 1
    value = C.class_of(value_form)
    spanning = []
    for h in C.cohomology(p2 + p3 - 1).classes() if p2 + p3 - 1 >= 0 else []:
        spanning.append(C.class_of(wedge(r1, h.representative)))
    for h in C.cohomology(p1 + p2 - 1).classes() if p1 + p2 - 1 >= 0 else []:
        spanning.append(C.class_of(wedge(h.representative, r3)))
    indet, rows, piv = _span_basis(spanning, C, deg)
    trivial = linalg.in_span(list(value.coords), rows, piv)
    return TripleMasseyResult(value, indet, trivial, xi, eta, value_form)


@dataclass
class DefiningSystem:
    """Entries ``a(i, j)`` for ``1 <= i <= j <= t``, ``(i, j) != (1, t)``, keyed by 1-based pairs."""

    complex: CochainComplex
    t: int
    entries: dict

    def degrees(self) -> list:
        return [self.entries[(i, i)].degree for i in range(1, self.t + 1)]

    def rhs(self, i: int, j: int) -> Form:
        """Right-hand side of the defining equation for cell (i, j)."""
        e = self.entries
        out = None
        for k in range(i, j):
            term = wedge(e[(i, k)].sign_bar(), e[(k + 1, j)])
            out = term if out is None else out + term
        return out

    def violations(self) -> list:
        C = self.complex
        bad = []
        for i in range(1, self.t + 1):
            f = self.entries[(i, i)]
            if C.differential(f):
                bad.append(f"a({i},{i}) is not closed")
        for length in range(1, self.t):
            for i in range(1, self.t - length + 1):
                j = i + length
                if (i, j) == (1, self.t):
                    continue
                if C.differential(self.entries[(i, j)]) != self.rhs(i, j):
                    bad.append(f"defining equation fails at cell ({i},{j})")
        return bad

    def validate(self):
        bad = self.violations()
        if bad:
            raise NilforgeError("invalid defining system: " + "; ".join(bad))


@dataclass
class MasseyValue:
    form: Form
    value: CohomologyClass
    system: DefiningSystem

    @property
    def degree(self) -> int:
        return self.form.degree


def solve_defining_system(C: CochainComplex, classes: Sequence, representatives: Sequence[Form] | None = None) -> DefiningSystem:
    """Fill a defining system cell by cell in increasing ``j - i``, one exact solve per cell."""
    t = len(classes)
    if t < 3:
        raise ValueError("Massey products need at least three classes")
    cls = [_as_class(C, a) for a in classes]
    reps = list(representatives) if representatives is not None else [c.representative for c in cls]
    for i, r in enumerate(reps):
        if C.differential(r):
            raise NotClosedError(f"representative {i + 1} is not closed")
    entries = {(i + 1, i + 1): reps[i] for i in range(t)}
    ds = DefiningSystem(C, t, entries)
    for length in range(1, t):
        for i in range(1, t - length + 1):
            j = i + length
            if (i, j) == (1, t):
                continue
            rhs = ds.rhs(i, j)
            x = C.is_exact_with_preimage(rhs)
            if x is None:
                obstruction = C.class_of(rhs)
                raise ObstructedCellError(
                    f"defining system blocked at cell ({i},{j}): {format_terms(rhs)} is closed but not exact",
                    (i, j),
                    obstruction,
                )
            entries[(i, j)] = x
    return ds


def massey_value(ds: DefiningSystem) -> MasseyValue:
    ds.validate()
    form = ds.rhs(1, ds.t)
    C = ds.complex
    if C.differential(form):
        raise NotClosedError("Massey value form is not closed")
    expected = sum(ds.degrees()) - (ds.t - 2)
    if form.degree != expected:
        raise DegreeError(f"value has degree {form.degree}, expected {expected}")
    return MasseyValue(form, C.class_of(form), ds)


def equivariant_average_system(act: FiniteCyclicAction, ds: DefiningSystem, target: Subcomplex | None = None) -> DefiningSystem:
    """Replace every entry by its orbit average, cell by cell.

    Diagonal entries must already be invariant. An averaged entry that no
    longer solves its equation (possible only when two off-diagonal entries
    multiply, i.e. arity >= 5) is replaced by an invariant primitive of the
    averaged right-hand side.
    """
    from nilforge.symmetry import invariant_complex

    A = act.algebra
    C = target if target is not None else invariant_complex(A, act)
    for i in range(1, ds.t + 1):
        f = ds.entries[(i, i)]
        if average(act, f) != f:
            raise NilforgeError(f"class representative {i} is not invariant: {format_terms(f)}")
    out = DefiningSystem(C, ds.t, {(i, i): ds.entries[(i, i)] for i in range(1, ds.t + 1)})
    for length in range(1, ds.t):
        for i in range(1, ds.t - length + 1):
            j = i + length
            if (i, j) == (1, ds.t):
                continue
            cand = average(act, ds.entries[(i, j)])
            rhs = out.rhs(i, j)
            if A.differential(cand) != rhs:
                cand = C.is_exact_with_preimage(rhs)
                if cand is None:
                    raise ObstructedCellError(
                        f"averaged system blocked at cell ({i},{j})", (i, j), C.class_of(rhs)
                    )
            out.entries[(i, j)] = cand
    out.validate()
    return out


@dataclass
class CertificateCondition:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ObstructionCertificate:
    sigma: Form
    checklist: list
    value: MasseyValue | None = None
    psi: Form | None = None
    sigma_psi_class: CohomologyClass | None = None
    top_multiple: object = None
    representatives: list = dc_field(default_factory=list)

    @property
    def valid(self) -> bool:
        return len(self.checklist) == 4 and all(c.passed for c in self.checklist)

    @property
    def verdict(self) -> str:
        return "valid" if self.valid else "inconclusive"


def _ambient(C: CochainComplex):
    return C.parent if isinstance(C, Subcomplex) else C


def _annihilating_representative(C: CochainComplex, sigma: Form, rep: Form):
    """Some ``rep + d x`` (x in C) with ``sigma ^ (rep + d x) == 0``, or None."""
    A = _ambient(C)
    target = wedge(sigma, rep)
    if not target:
        return rep
    k = rep.degree
    deg = target.degree
    prev = C.basis(k - 1) if k >= 1 else []
    cols = [A.coords(deg, wedge(sigma, C.differential(b))) for b in prev]
    rhs = [-c for c in A.coords(deg, target)]
    if not cols:
        return None
    mat = linalg.transpose(cols)
    x = linalg.solve(mat, rhs, len(prev), C.field.zero)
    if x is None:
        return None
    correction = C.form_from(k - 1, x)
    return rep + C.differential(correction)


def quad_nontriv_certificate(C: CochainComplex, classes: Sequence, sigma: Form) -> ObstructionCertificate:
    """Sufficient certificate that <a1, a2, a3, a4> does not contain zero.

    Conditions, each reported separately:

    1. both triple sub-products are defined and trivial;
    2. ``H^(p_i + p_{i+1} - 1) = 0`` for i = 1, 2, 3, so every closed correction
       to ``a(i, i+1)`` is exact;
    3. representatives of a1 and a4 exist with ``sigma ^ rep == 0`` as forms;
    4. one value ``Psi0`` satisfies ``[sigma] u [Psi0] != 0``.

    Under 1-4 every value wedges with sigma to the same nonzero class, so no
    value is zero. A failure means "inconclusive", never "trivial".
    ``psi`` is stored with the opposite sign to the defining-system sum, the
    convention in which ``sigma ^ psi`` is written as a multiple of the top form.
    """
    if len(classes) != 4:
        raise ValueError("the certificate concerns quadruple products")
    if C.differential(sigma):
        raise NotClosedError(f"sigma is not closed: d sigma = {format_terms(C.differential(sigma))}")
    cls = [_as_class(C, a) for a in classes]
    p = [c.degree for c in cls]
    checklist = []
    cert = ObstructionCertificate(sigma, checklist)

    details = []
    ok1 = True
    for lo in (0, 1):
        trio = cls[lo : lo + 3]
        label = f"<a{lo + 1},a{lo + 2},a{lo + 3}>"
        try:
            res = triple_massey(C, *trio)
        except MasseyUndefinedError as exc:
            ok1 = False
            details.append(f"{label} undefined: {exc}")
            continue
        if not res.trivial:
            ok1 = False
            details.append(f"{label} is non-trivial")
        else:
            details.append(f"{label} defined and trivial")
    checklist.append(CertificateCondition("triple_subproducts_trivial", ok1, "; ".join(details)))

    degs = sorted({p[i] + p[i + 1] - 1 for i in range(3)})
    nonzero = {k: C.cohomology(k).dimension for k in degs if C.cohomology(k).dimension}
    checklist.append(
        CertificateCondition(
            "correction_degrees_acyclic",
            not nonzero,
            f"H^k = 0 for k in {degs}" if not nonzero else f"nonzero cohomology {nonzero}",
        )
    )

    rep1 = _annihilating_representative(C, sigma, cls[0].representative)
    rep4 = _annihilating_representative(C, sigma, cls[3].representative)
    ok3 = rep1 is not None and rep4 is not None
    missing = [n for n, r in (("a1", rep1), ("a4", rep4)) if r is None]
    checklist.append(
        CertificateCondition(
            "sigma_annihilates_end_representatives",
            ok3,
            "sigma ^ rep = 0 for a1 and a4" if ok3 else f"no representative of {', '.join(missing)} is killed by sigma",
        )
    )

    reps = [rep1 or cls[0].representative, cls[1].representative, cls[2].representative, rep4 or cls[3].representative]
    cert.representatives = reps
    try:
        ds = solve_defining_system(C, cls, reps)
        val = massey_value(ds)
    except MasseyUndefinedError as exc:
        checklist.append(CertificateCondition("sigma_pairs_nontrivially", False, f"no defining system: {exc}"))
        return cert
    cert.value = val
    cert.psi = -val.form
    prod = C.class_of(wedge(sigma, cert.psi))
    cert.sigma_psi_class = prod
    A = _ambient(C)
    top_form = A.gens.unit(A.field)
    for g in A.gens.names:
        top_form = wedge(top_form, A.gen(g))
    if prod.degree == C.top_degree and C.contains(top_form):
        ref = C.class_of(top_form)
        if not ref.is_zero():
            cert.top_multiple = prod.coords[0] / ref.coords[0]
    ok4 = not prod.is_zero()
    checklist.append(
        CertificateCondition(
            "sigma_pairs_nontrivially",
            ok4,
            f"[sigma ^ Psi0] = {cert.top_multiple} x top class" if ok4 else "[sigma ^ Psi0] = 0",
        )
    )
    return cert


def massey_degree_scan(betti: Sequence[int], max_arity: int = 6) -> dict:
    """Which arity/degree configurations could carry a non-trivial Massey product.

    Classes are taken in degrees ``0 < p < n`` with nonzero Betti number. A
    configuration survives when its value degree ``sum(p) - (t - 2)`` is below
    the top degree ``n`` and has nonzero cohomology. Values landing in the top
    degree are listed as killable: adding a closed form dual to a1 to the
    entry a(2, t) shifts the value by any multiple of the top class.
    """
    n = len(betti) - 1
    degrees = [k for k in range(1, n) if betti[k]]
    report = {"top_degree": n, "class_degrees": degrees, "arities": {}}
    survivors = []
    for t in range(3, max_arity + 1):
        alive, killable, empty = [], [], 0
        for tup in cartesian(degrees, repeat=t):
            deg = sum(tup) - (t - 2)
            if deg > n or deg < 0:
                empty += 1
            elif deg == n:
                killable.append(tup)
            elif betti[deg]:
                alive.append(tup)
            else:
                empty += 1
        report["arities"][t] = {"survivors": alive, "top_degree_killable": killable, "excluded": empty}
        survivors.extend((t, tup) for tup in alive)
    report["survivors"] = survivors
    return report
