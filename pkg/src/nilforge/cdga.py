"""Chevalley-Eilenberg complexes, subcomplexes and their exact cohomology."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

from nilforge import linalg
from nilforge.errors import (
    DegreeError,
    FieldMismatchError,
    GeneratorMismatchError,
    NilforgeError,
    NotClosedError,
    NotInComplexError,
)
from nilforge.exterior import Form, GeneratorSet, basis_of_degree, format_terms, indices, wedge
from nilforge.scalar import QQ


@dataclass
class CheckReport:
    """Outcome of a verification; ``violations`` is empty iff ``passed``."""

    name: str
    passed: bool
    violations: list = dc_field(default_factory=list)
    details: dict = dc_field(default_factory=dict)

    def __bool__(self):
        return self.passed


class CochainComplex:
    """Shared cohomology machinery for a DGA and for spanned subcomplexes.

    Subclasses provide a basis of each cochain space, coordinates of a form in
    that basis, and the matrix of ``d`` between consecutive bases.
    """

    gens: GeneratorSet
    field: object

    def __init__(self):
        self._dmat_cache: dict = {}
        self._coh_cache: dict = {}

    # -- to be provided by subclasses ------------------------------------
    @property
    def top_degree(self) -> int:
        return len(self.gens)

    def dim(self, k: int) -> int:
        raise NotImplementedError

    def basis(self, k: int) -> list:
        raise NotImplementedError

    def coords(self, k: int, f: Form) -> list:
        raise NotImplementedError

    def form_from(self, k: int, vec: Sequence) -> Form:
        raise NotImplementedError

    def differential(self, f: Form) -> Form:
        raise NotImplementedError

    # -- derived ------------------------------------------------------------
    def _check_form(self, f: Form):
        if f.gens != self.gens:
            raise GeneratorMismatchError("form lives over a different generator set")
        if f.field != self.field:
            raise FieldMismatchError(
                f"form has coefficients in {f.field.name}, complex in {self.field.name}"
            )

    def contains(self, f: Form) -> bool:
        try:
            self.coords(f.degree, f)
        except NotInComplexError:
            return False
        return True

    def dmatrix(self, k: int) -> list:
        """Matrix of ``d: C^k -> C^(k+1)``; rows index C^(k+1), columns C^k."""
        if k in self._dmat_cache:
            return self._dmat_cache[k]
        rows_out = self.dim(k + 1) if k + 1 <= self.top_degree else 0
        if rows_out and self.dim(k):
            cols = [self.coords(k + 1, self.differential(b)) for b in self.basis(k)]
            mat = linalg.transpose(cols)
        else:
            mat = [[] for _ in range(rows_out)]
        self._dmat_cache[k] = mat
        return mat

    def _zero(self):
        return self.field.zero

    def cohomology(self, k: int) -> CohomologyBasis:
        """Canonical basis of ``H^k``: reduced echelon complement of the exact forms."""
        if k < 0:
            raise DegreeError(f"negative degree {k}")
        if k in self._coh_cache:
            return self._coh_cache[k]
        n = self.dim(k)
        zero, one = self.field.zero, self.field.one
        dk = self.dmatrix(k)
        closed = linalg.nullspace([r for r in dk if any(r)], n, zero, one) if n else []
        if k > 0 and self.dim(k - 1):
            im_rows = [r for r in linalg.transpose(self.dmatrix(k - 1)) if any(r)]
        else:
            im_rows = []
        b_rows, b_piv = linalg.rref(im_rows, n) if im_rows else ([], [])
        reduced = [linalg.reduce_against(z, b_rows, b_piv) for z in closed]
        h_rows, h_piv = linalg.rref(reduced, n) if reduced else ([], [])
        reps = [self.form_from(k, r) for r in h_rows]
        basis = CohomologyBasis(self, k, reps, h_rows, h_piv, b_rows, b_piv)
        self._coh_cache[k] = basis
        return basis

    def betti(self) -> list:
        return [self.cohomology(k).dimension for k in range(self.top_degree + 1)]

    def euler(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self.betti()))

    def betti_and_euler(self):
        b = self.betti()
        return b, sum((-1) ** k * x for k, x in enumerate(b))

    def class_of(self, f: Form) -> CohomologyClass:
        self._check_form(f)
        df = self.differential(f)
        if df:
            raise NotClosedError(f"form is not closed: d({format_terms(f)}) = {format_terms(df)}", df)
        basis = self.cohomology(f.degree)
        return basis.class_of_vector(self.coords(f.degree, f), f)

    def is_exact_with_preimage(self, f: Form):
        """Some ``x`` with ``d x = f``, or None when ``f`` is not exact."""
        self._check_form(f)
        k = f.degree
        if k == 0:
            return None if f else self.form_from(0, [self._zero()] * self.dim(0))
        n_prev = self.dim(k - 1)
        v = self.coords(k, f)
        if not n_prev:
            return None if any(v) else self.form_from(k - 1, [])
        x = linalg.solve(self.dmatrix(k - 1), v, n_prev, self._zero())
        if x is None:
            return None
        return self.form_from(k - 1, x)

    preimage = is_exact_with_preimage

    def is_exact(self, f: Form) -> bool:
        return self.is_exact_with_preimage(f) is not None

    def cup(self, a: CohomologyClass, b: CohomologyClass) -> CohomologyClass:
        return cup_product(a, b)

    def unit_class(self) -> CohomologyClass:
        return self.class_of(self.gens.unit(self.field))

    def top_class(self) -> CohomologyClass:
        basis = self.cohomology(self.top_degree)
        if basis.dimension != 1:
            raise NilforgeError(f"top cohomology has dimension {basis.dimension}, expected 1")
        return basis.element([self.field.one])

    def poincare_pairing(self, k: int) -> list:
        """Cup pairing ``H^k x H^(n-k) -> H^n`` in the canonical bases."""
        n = self.top_degree
        top = self.cohomology(n)
        if top.dimension != 1:
            raise NilforgeError(f"top cohomology has dimension {top.dimension}, expected 1")
        left = self.cohomology(k).representatives
        right = self.cohomology(n - k).representatives
        return [[self.class_of(wedge(r, s)).coords[0] for s in right] for r in left]


@dataclass(eq=False)
class CohomologyBasis:
    complex: CochainComplex
    degree: int
    representatives: list
    _rows: list
    _pivots: list
    _exact_rows: list
    _exact_pivots: list

    @property
    def dimension(self) -> int:
        return len(self.representatives)

    def __len__(self):
        return self.dimension

    def class_of_vector(self, vec, representative=None) -> CohomologyClass:
        w = linalg.reduce_against(vec, self._exact_rows, self._exact_pivots)
        coords = tuple(w[p] for p in self._pivots)
        if any(linalg.reduce_against(w, self._rows, self._pivots)):
            raise NotClosedError("vector does not represent a cohomology class")
        if representative is None:
            representative = self.complex.form_from(self.degree, vec)
        return CohomologyClass(self.complex, self.degree, coords, representative)

    def element(self, coords: Sequence) -> CohomologyClass:
        field = self.complex.field
        coords = tuple(field.coerce(c) for c in coords)
        if len(coords) != self.dimension:
            raise ValueError(f"expected {self.dimension} coordinates")
        rep = self.complex.gens.zero(self.degree, field)
        for c, r in zip(coords, self.representatives):
            if c:
                rep = rep + r.scale(c)
        return CohomologyClass(self.complex, self.degree, coords, rep)

    def classes(self) -> list:
        return [
            self.element([1 if i == j else 0 for j in range(self.dimension)])
            for i in range(self.dimension)
        ]


@dataclass(frozen=True, eq=False)
class CohomologyClass:
    complex: CochainComplex
    degree: int
    coords: tuple
    representative: Form

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, CohomologyClass):
            return NotImplemented
        return (
            self.complex is other.complex
            and self.degree == other.degree
            and self.coords == other.coords
        )

    def __hash__(self):
        return hash((id(self.complex), self.degree, self.coords))

    def __add__(self, other: CohomologyClass) -> CohomologyClass:
        if other.complex is not self.complex or other.degree != self.degree:
            raise DegreeError("cannot add classes of different degrees or complexes")
        return CohomologyClass(
            self.complex,
            self.degree,
            tuple(a + b for a, b in zip(self.coords, other.coords)),
            self.representative + other.representative,
        )

    def scale(self, c) -> CohomologyClass:
        c = self.complex.field.coerce(c)
        return CohomologyClass(
            self.complex, self.degree, tuple(c * x for x in self.coords), self.representative.scale(c)
        )

    def cup(self, other: CohomologyClass) -> CohomologyClass:
        return cup_product(self, other)

    def __repr__(self):
        coords = ", ".join(str(c) for c in self.coords)
        return f"CohomologyClass(degree={self.degree}, coords=[{coords}])"


def cup_product(a: CohomologyClass, b: CohomologyClass) -> CohomologyClass:
    if a.complex is not b.complex:
        raise GeneratorMismatchError("classes belong to different complexes")
    return a.complex.class_of(wedge(a.representative, b.representative))


class DGA(CochainComplex):
    """Chevalley-Eilenberg algebra: degree-1 generators with degree-2 differentials."""

    def __init__(
        self,
        gens: GeneratorSet | Sequence[str],
        diff: Mapping[str, Form] | None = None,
        field=QQ,
        name: str | None = None,
        check: bool = False,
    ):
        super().__init__()
        if not isinstance(gens, GeneratorSet):
            gens = GeneratorSet(gens)
        self.gens = gens
        self.field = field
        self.name = name
        diff = dict(diff or {})
        images = {}
        for g in gens.names:
            f = diff.pop(g, None)
            if f is None:
                f = gens.zero(2, field)
            if f.gens != gens:
                raise GeneratorMismatchError(f"d({g}) is not written in the algebra's generators")
            if f.degree != 2:
                raise DegreeError(f"d({g}) must have degree 2, got {f.degree}")
            if f.field != field:
                raise FieldMismatchError(f"d({g}) has coefficients outside {field.name}")
            images[g] = f
        if diff:
            raise GeneratorMismatchError(f"differentials given for unknown generators {sorted(diff)}")
        self.diff = images
        self._gen_d = [images[g] for g in gens.names]
        self._masks = {}
        self._index = {}
        self._dmono: dict = {}
        if check:
            report = verify_d2(self)
            if not report.passed:
                raise NilforgeError("d^2 != 0: " + "; ".join(report.violations))

    # -- basis ----------------------------------------------------------
    def masks(self, k: int) -> list:
        if not 0 <= k <= len(self.gens):
            return []
        if k not in self._masks:
            self._masks[k] = basis_of_degree(self.gens, k)
            self._index[k] = {m: i for i, m in enumerate(self._masks[k])}
        return self._masks[k]

    def dim(self, k: int) -> int:
        if not 0 <= k <= len(self.gens):
            return 0
        return len(self.masks(k))

    def basis(self, k: int) -> list:
        one = self.field.one
        return [Form(self.gens, k, {m: one}, self.field) for m in self.masks(k)]

    def coords(self, k: int, f: Form) -> list:
        self._check_form(f)
        if f.degree != k:
            raise DegreeError(f"expected a degree-{k} form, got degree {f.degree}")
        return f.vector(self.masks(k))

    def form_from(self, k: int, vec: Sequence) -> Form:
        return Form.from_vector(self.gens, k, self.masks(k), vec, self.field)

    # -- differential -----------------------------------------------------
    def _d_monomial(self, m: int) -> Form:
        cached = self._dmono.get(m)
        if cached is not None:
            return cached
        idx = indices(m)
        out = self.gens.zero(len(idx) + 1, self.field)
        for pos, i in enumerate(idx):
            dg = self._gen_d[i]
            if not dg:
                continue
            left = Form(self.gens, pos, {sum(1 << j for j in idx[:pos]): self.field.one}, self.field)
            right = Form(
                self.gens, len(idx) - pos - 1, {sum(1 << j for j in idx[pos + 1 :]): self.field.one}, self.field
            )
            term = wedge(wedge(left, dg), right)
            out = out + (term if pos % 2 == 0 else -term)
        self._dmono[m] = out
        return out

    def differential(self, f: Form) -> Form:
        self._check_form(f)
        out: dict = {}
        for m, c in f.terms.items():
            for m2, v in self._d_monomial(m).terms.items():
                out[m2] = out.get(m2, 0) + c * v
        return Form(self.gens, f.degree + 1, out, self.field)

    d = differential

    # -- conveniences -------------------------------------------------------
    def gen(self, name: str) -> Form:
        return self.gens.gen(name, self.field)

    def unit(self) -> Form:
        return self.gens.unit(self.field)

    def parse(self, text: str) -> Form:
        from nilforge.dsl import parse_form

        return parse_form(text, self.gens, self.field)

    def extend_scalars(self, field) -> DGA:
        return DGA(self.gens, {g: f.over(field) for g, f in self.diff.items()}, field, self.name)

    def is_equal(self, other: DGA) -> bool:
        return (
            isinstance(other, DGA)
            and self.gens == other.gens
            and self.field == other.field
            and all(self.diff[g] == other.diff[g] for g in self.gens.names)
        )

    def __repr__(self):
        return f"DGA({self.name or ''}, gens={list(self.gens.names)}, field={self.field.name})"


def verify_d2(A: DGA) -> CheckReport:
    violations = []
    for g in A.gens.names:
        dd = A.differential(A.diff[g])
        if dd:
            violations.append(f"d(d({g})) = {format_terms(dd)}")
    return CheckReport("d2", not violations, violations)


class Subcomplex(CochainComplex):
    """Per-degree spanned subspaces of a DGA, closed under d.

    Each span is canonicalised to reduced echelon form in the parent's
    monomial coordinates; coordinates of a form are read off at the pivots.
    """

    def __init__(self, parent: DGA, spans: Mapping[int, Sequence[Form]], name: str | None = None, check: bool = True):
        super().__init__()
        self.parent = parent
        self.gens = parent.gens
        self.field = parent.field
        self.name = name
        self._rows = {}
        self._piv = {}
        for k in range(parent.top_degree + 1):
            forms = list(spans.get(k, ()))
            vecs = []
            for f in forms:
                if f.degree != k:
                    raise DegreeError(f"span for degree {k} contains a form of degree {f.degree}")
                vecs.append(parent.coords(k, f))
            rows, piv = linalg.rref(vecs, parent.dim(k)) if vecs else ([], [])
            self._rows[k] = rows
            self._piv[k] = piv
        if check:
            for k in range(parent.top_degree):
                for b in self.basis(k):
                    db = parent.differential(b)
                    if not self.contains(db):
                        raise NotInComplexError(
                            f"span is not closed under d in degree {k}: d({format_terms(b)}) = {format_terms(db)}"
                        )

    @classmethod
    def from_vectors(cls, parent: DGA, vectors: Mapping[int, Sequence[Sequence]], name=None, check=True):
        spans = {k: [parent.form_from(k, v) for v in vs] for k, vs in vectors.items()}
        return cls(parent, spans, name, check)

    def dim(self, k: int) -> int:
        return len(self._rows.get(k, ()))

    def basis(self, k: int) -> list:
        return [self.parent.form_from(k, r) for r in self._rows.get(k, ())]

    def coords(self, k: int, f: Form) -> list:
        v = self.parent.coords(k, f)
        rows, piv = self._rows.get(k, []), self._piv.get(k, [])
        if any(linalg.reduce_against(v, rows, piv)):
            raise NotInComplexError(f"form {format_terms(f)} is not in the subcomplex")
        return [v[p] for p in piv]

    def form_from(self, k: int, vec: Sequence) -> Form:
        rows = self._rows.get(k, [])
        n = self.parent.dim(k)
        out = [self.field.zero] * n
        for c, r in zip(vec, rows):
            if c:
                out = [a + c * b if b else a for a, b in zip(out, r)]
        return self.parent.form_from(k, out)

    def differential(self, f: Form) -> Form:
        return self.parent.differential(f)

    d = differential

    def __repr__(self):
        dims = [self.dim(k) for k in range(self.top_degree + 1)]
        return f"Subcomplex({self.name or ''}, dims={dims})"


def _embed(f: Form, gens: GeneratorSet, shift: int) -> Form:
    return Form(gens, f.degree, {m << shift: c for m, c in f.terms.items()}, f.field)


def tensor_product(A: DGA, B: DGA, name: str | None = None) -> DGA:
    """Product algebra; colliding generator names of B get a numeric suffix."""
    if A.field != B.field:
        raise FieldMismatchError(f"cannot tensor algebras over {A.field.name} and {B.field.name}")
    used = set(A.gens.names)
    b_names = []
    for g in B.gens.names:
        new = g
        k = 1
        while new in used:
            new = f"{g}{k}"
            k += 1
        used.add(new)
        b_names.append(new)
    gens = GeneratorSet(list(A.gens.names) + b_names)
    n = len(A.gens)
    diff = {g: _embed(A.diff[g], gens, 0) for g in A.gens.names}
    for g, new in zip(B.gens.names, b_names):
        diff[new] = _embed(B.diff[g], gens, n)
    return DGA(gens, diff, A.field, name)
