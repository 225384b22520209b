"""Algebra morphisms, finite cyclic actions, averaging and invariant subcomplexes."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from nilforge import linalg
from nilforge.cdga import CheckReport, CohomologyBasis, DGA, Subcomplex
from nilforge.errors import (
    DegreeError,
    FieldMismatchError,
    GeneratorMismatchError,
    SingularMatrixError,
)
from nilforge.exterior import Form, GeneratorSet, format_terms, substitute


class AlgebraMorphism:
    """Multiplicative map determined by degree-1 images of the source generators.

    ``apply`` is the pullback direction used throughout: a form over the source
    generators is sent to a form over the target generators.
    """

    def __init__(self, source: DGA, target: DGA, images: Mapping[str, Form], name: str | None = None):
        self.source = source
        self.target = target
        self.name = name
        missing = [g for g in source.gens.names if g not in images]
        extra = [g for g in images if g not in source.gens]
        if missing:
            raise GeneratorMismatchError(f"no image given for generators {missing}")
        if extra:
            raise GeneratorMismatchError(f"images given for unknown generators {extra}")
        imgs = []
        for g in source.gens.names:
            f = images[g]
            if f.gens != target.gens:
                raise GeneratorMismatchError(f"image of {g} is not over the target generators")
            if f.degree != 1:
                raise DegreeError(f"image of {g} must have degree 1")
            if f.field != target.field:
                raise FieldMismatchError(f"image of {g} has coefficients outside {target.field.name}")
            imgs.append(f)
        self.images = dict(zip(source.gens.names, imgs))
        self._imgs = imgs
        self._cache: dict = {}
        self._matrices: dict = {}

    @classmethod
    def identity(cls, A: DGA) -> AlgebraMorphism:
        return cls(A, A, {g: A.gen(g) for g in A.gens.names}, "id")

    def apply(self, f: Form) -> Form:
        if f.gens != self.source.gens:
            raise GeneratorMismatchError("form is not over the morphism's source generators")
        return substitute(f, self._imgs, self.target.gens, self.target.field, self._cache)

    __call__ = apply

    def matrix(self, k: int) -> list:
        """Matrix of the map on degree-k monomial coordinates (columns are images)."""
        if k not in self._matrices:
            cols = [self.target.coords(k, self.apply(b)) for b in self.source.basis(k)]
            self._matrices[k] = linalg.transpose(cols) if cols else []
        return self._matrices[k]

    def linear_matrix(self) -> list:
        return self.matrix(1)

    def compose(self, other: AlgebraMorphism) -> AlgebraMorphism:
        """``self.compose(other).apply(f) == self.apply(other.apply(f))``."""
        if other.target.gens != self.source.gens:
            raise GeneratorMismatchError("morphisms are not composable")
        return AlgebraMorphism(
            other.source, self.target, {g: self.apply(other.images[g]) for g in other.source.gens.names}
        )

    def power(self, n: int) -> AlgebraMorphism:
        out = AlgebraMorphism.identity(self.source)
        for _ in range(n):
            out = self.compose(out)
        return out

    def is_identity(self) -> bool:
        return self.source.gens == self.target.gens and all(
            self.images[g] == self.target.gen(g) for g in self.source.gens.names
        )

    def cochain_violations(self) -> list:
        out = []
        for g in self.source.gens.names:
            lhs = self.apply(self.source.diff[g])
            rhs = self.target.differential(self.images[g])
            if lhs != rhs:
                out.append(f"phi(d {g}) = {format_terms(lhs)} but d(phi {g}) = {format_terms(rhs)}")
        return out

    def is_cochain_map(self) -> bool:
        return not self.cochain_violations()


class FiniteCyclicAction:
    """Cyclic group of order n generated by one endomorphism of a DGA."""

    def __init__(self, generator: AlgebraMorphism, order: int, name: str | None = None):
        if order < 1:
            raise ValueError("order must be positive")
        if generator.source.gens != generator.target.gens:
            raise GeneratorMismatchError("an action needs an endomorphism")
        self.generator = generator
        self.order = order
        self.name = name or generator.name
        self._powers = None

    @property
    def algebra(self) -> DGA:
        return self.generator.source

    def powers(self) -> list:
        if self._powers is None:
            ps = [AlgebraMorphism.identity(self.algebra)]
            for _ in range(self.order - 1):
                ps.append(self.generator.compose(ps[-1]))
            self._powers = ps
        return self._powers

    @classmethod
    def trivial(cls, A: DGA) -> FiniteCyclicAction:
        return cls(AlgebraMorphism.identity(A), 1, "id")


def apply_morphism(phi: AlgebraMorphism, f: Form) -> Form:
    return phi.apply(f)


def verify_action(A: DGA, act: FiniteCyclicAction) -> CheckReport:
    phi = act.generator
    violations = []
    if phi.source.gens != A.gens:
        return CheckReport("action", False, ["action is not defined on this algebra"])
    violations.extend(phi.cochain_violations())
    p = AlgebraMorphism.identity(A)
    for k in range(1, act.order + 1):
        p = phi.compose(p)
        if k < act.order and p.is_identity():
            violations.append(f"generator has order {k}, smaller than declared {act.order}")
            break
        if k == act.order and not p.is_identity():
            violations.append(f"generator raised to the power {act.order} is not the identity")
    return CheckReport("action", not violations, violations, {"order": act.order})


def average(act: FiniteCyclicAction, f: Form) -> Form:
    """Orbit average ``(1/n) sum_k (phi^k) f``; a projector onto invariant forms."""
    out = f.gens.zero(f.degree, f.field)
    for p in act.powers():
        out = out + p.apply(f)
    return out.scale(Fraction(1, act.order))


def _fixed_vectors(act: FiniteCyclicAction, k: int) -> list:
    A = act.algebra
    n = A.dim(k)
    mat = act.generator.matrix(k)
    one = A.field.one
    shifted = [[mat[i][j] - (one if i == j else 0) for j in range(n)] for i in range(n)]
    return linalg.nullspace([r for r in shifted if any(r)], n, A.field.zero, one)


def invariant_complex(A: DGA, act: FiniteCyclicAction, name: str | None = None) -> Subcomplex:
    """Subcomplex of forms fixed by the generator, degree by degree."""
    vectors = {k: _fixed_vectors(act, k) for k in range(A.top_degree + 1)}
    return Subcomplex.from_vectors(A, vectors, name or f"{A.name or 'A'}^{act.name or 'G'}")


def invariant_cohomology(A: DGA, act: FiniteCyclicAction, k: int, complex_: Subcomplex | None = None) -> CohomologyBasis:
    C = complex_ or invariant_complex(A, act)
    return C.cohomology(k)


def cohomology_action_matrix(A: DGA, act: FiniteCyclicAction, k: int) -> list:
    """Matrix of the induced map on ``H^k(A)`` in the canonical basis."""
    basis = A.cohomology(k)
    cols = [list(A.class_of(act.generator.apply(r)).coords) for r in basis.representatives]
    return linalg.transpose(cols) if cols else []


def fixed_cohomology_dimension(A: DGA, act: FiniteCyclicAction, k: int) -> int:
    """Dimension of the fixed subspace of ``H^k(A)``, computed on cohomology directly."""
    mat = cohomology_action_matrix(A, act, k)
    n = len(mat)
    if n == 0:
        return 0
    one = A.field.one
    shifted = [[mat[i][j] - (one if i == j else 0) for j in range(n)] for i in range(n)]
    return n - linalg.rank(shifted, n)


def change_of_basis(A: DGA, substitution: Mapping[str, Form] | AlgebraMorphism, name: str | None = None) -> DGA:
    """Rewrite A in new degree-1 generators given as linear forms in the old ones."""
    images = substitution.images if isinstance(substitution, AlgebraMorphism) else dict(substitution)
    new_names = list(images)
    if len(new_names) != len(A.gens):
        raise SingularMatrixError("a change of basis needs exactly as many new generators as old")
    field = A.field
    for nm, f in images.items():
        if f.gens != A.gens or f.degree != 1:
            raise DegreeError(f"new generator {nm} must be a degree-1 form over {list(A.gens.names)}")
        if f.field != field:
            raise FieldMismatchError(f"new generator {nm} has coefficients outside {field.name}")
    mat = [A.coords(1, images[nm]) for nm in new_names]
    inv = linalg.inverse(mat, field.zero, field.one)
    new_gens = GeneratorSet(new_names)
    # old_j = sum_k inv[j][k] new_k
    old_in_new = [
        Form(new_gens, 1, {1 << k: inv[j][k] for k in range(len(new_names))}, field) for j in range(len(A.gens))
    ]
    diff = {}
    for nm in new_names:
        d_old = A.differential(images[nm])
        diff[nm] = substitute(d_old, old_in_new, new_gens, field)
    return DGA(new_gens, diff, field, name)
