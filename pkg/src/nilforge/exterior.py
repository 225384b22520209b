"""Free graded-commutative algebra on named degree-1 generators.

A monomial is stored as an ``int`` bitmask over generator positions; the
canonical index sequence is the list of set bits in increasing order. Forms
are homogeneous sparse maps ``mask -> scalar`` with zero coefficients dropped.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Mapping, Sequence

from nilforge.errors import DegreeError, FieldMismatchError, GeneratorMismatchError
from nilforge.scalar import QQ, scalar_to_str

MAX_GENERATORS = 64


class GeneratorSet:
    """Ordered, immutable list of degree-1 generator names."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate generator names in {names}")
        if len(names) > MAX_GENERATORS:
            raise ValueError(f"at most {MAX_GENERATORS} generators are supported")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    def __setattr__(self, name, value):
        raise AttributeError("GeneratorSet is immutable")

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return isinstance(other, GeneratorSet) and other.names == self.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"GeneratorSet({list(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise GeneratorMismatchError(f"unknown generator {name!r}") from None

    def mask(self, names: Sequence[str]):
        """Return ``(sign, mask)`` of the wedge of the named generators."""
        return sort_indices([self.index(n) for n in names])

    def gen(self, name: str, field=QQ) -> Form:
        return Form(self, 1, {1 << self.index(name): field.one}, field)

    def gens(self, field=QQ) -> list:
        return [self.gen(n, field) for n in self.names]

    def unit(self, field=QQ) -> Form:
        return Form(self, 0, {0: field.one}, field)

    def zero(self, degree: int, field=QQ) -> Form:
        return Form(self, degree, {}, field)

    def monomial(self, names: Sequence[str], field=QQ) -> Form:
        sign, m = self.mask(names)
        if m is None:
            return self.zero(len(names), field)
        return Form(self, len(names), {m: field.coerce(sign)}, field)

    @property
    def top_mask(self) -> int:
        return (1 << len(self.names)) - 1


def indices(mask: int) -> tuple:
    """Canonical strictly increasing index sequence of a monomial mask."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def sort_indices(idx: Sequence[int]):
    """Sort an index sequence, returning ``(sign, mask)``; repeated index gives ``(0, None)``."""
    if len(set(idx)) != len(idx):
        return 0, None
    inversions = sum(1 for a in range(len(idx)) for b in range(a + 1, len(idx)) if idx[a] > idx[b])
    mask = 0
    for i in idx:
        mask |= 1 << i
    return (-1 if inversions % 2 else 1), mask


def merge_sign(m1: int, m2: int) -> int:
    """Sign of ``e_{m1} ^ e_{m2}`` relative to the sorted monomial; 0 if they overlap."""
    if m1 & m2:
        return 0
    inv = 0
    rest = m2
    while rest:
        low = rest & -rest
        j = low.bit_length() - 1
        inv += (m1 >> (j + 1)).bit_count()
        rest ^= low
    return -1 if inv & 1 else 1


def basis_of_degree(gens: GeneratorSet, k: int) -> list:
    """All C(n, k) monomial masks of degree k, in lexicographic index order."""
    n = len(gens)
    if not 0 <= k <= n:
        raise DegreeError(f"degree {k} out of range 0..{n}")
    out = []
    for combo in combinations(range(n), k):
        m = 0
        for i in combo:
            m |= 1 << i
        out.append(m)
    return out


def monomial_sort_key(mask: int):
    return indices(mask)


class Form:
    """Homogeneous element of the exterior algebra with exact coefficients."""

    __slots__ = ("gens", "degree", "terms", "field", "_hash")

    def __init__(self, gens: GeneratorSet, degree: int, terms: Mapping[int, object], field=QQ):
        clean = {}
        for m, c in terms.items():
            c = field.coerce(c)
            if not c:
                continue
            if m.bit_count() != degree:
                raise DegreeError(f"monomial {indices(m)} does not have degree {degree}")
            if m >> len(gens):
                raise GeneratorMismatchError("monomial uses indices outside the generator set")
            clean[m] = c
        object.__setattr__(self, "gens", gens)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    # -- comparison -----------------------------------------------------
    def _check_compatible(self, other: Form):
        if self.gens != other.gens:
            raise GeneratorMismatchError("forms live over different generator sets")
        if self.field != other.field:
            raise FieldMismatchError(
                f"forms have coefficients in {self.field.name} and {other.field.name}"
            )

    def __eq__(self, other):
        if isinstance(other, Form):
            return (
                self.gens == other.gens
                # the zero form has no meaningful degree
                and (self.degree == other.degree or not self.terms)
                and self.terms == other.terms
            )
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            h = hash((self.gens, self.degree if self.terms else None, frozenset(self.terms.items())))
            object.__setattr__(self, "_hash", h)
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- linear structure -------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        self._check_compatible(other)
        if self.degree != other.degree and self.terms and other.terms:
            raise DegreeError(f"cannot add forms of degree {self.degree} and {other.degree}")
        degree = self.degree if self.terms else other.degree
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Form(self.gens, degree, out, self.field)

    def __neg__(self):
        return Form(self.gens, self.degree, {m: -c for m, c in self.terms.items()}, self.field)

    def __sub__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> Form:
        c = self.field.coerce(c)
        if not c:
            return Form(self.gens, self.degree, {}, self.field)
        return Form(self.gens, self.degree, {m: c * v for m, v in self.terms.items()}, self.field)

    def __mul__(self, other):
        if isinstance(other, Form):
            return wedge(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def wedge(self, other: Form) -> Form:
        return wedge(self, other)

    def sign_bar(self) -> Form:
        """``(-1)^deg * self``, the bar operation of Massey defining systems."""
        return -self if self.degree % 2 else self

    # -- coordinates -------------------------------------------------------
    def coefficient(self, names: Sequence[str]):
        sign, m = self.gens.mask(names)
        if m is None:
            return self.field.zero
        return sign * self.terms.get(m, self.field.zero)

    def vector(self, basis_masks: Sequence[int]) -> list:
        zero = self.field.zero
        return [self.terms.get(m, zero) for m in basis_masks]

    @classmethod
    def from_vector(cls, gens, degree, basis_masks, vec, field=QQ) -> Form:
        return cls(gens, degree, {m: c for m, c in zip(basis_masks, vec) if c}, field)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda mc: indices(mc[0]))

    def over(self, field) -> Form:
        """Same form with coefficients coerced into ``field``."""
        return Form(self.gens, self.degree, self.terms, field)

    def __repr__(self):
        return f"Form({format_terms(self)!r}, degree={self.degree})"

    def __str__(self):
        return format_terms(self)


def wedge(f: Form, g: Form) -> Form:
    f._check_compatible(g)
    out: dict = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            if m1 & m2:
                continue
            s = merge_sign(m1, m2)
            m = m1 | m2
            v = c1 * c2
            out[m] = out.get(m, 0) + (v if s > 0 else -v)
    return Form(f.gens, f.degree + g.degree, out, f.field)


def wedge_all(forms: Sequence[Form], gens: GeneratorSet | None = None, field=None) -> Form:
    if not forms:
        if gens is None:
            raise ValueError("empty wedge needs a generator set")
        return gens.unit(field or QQ)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def lin_comb(coeffs: Sequence, forms: Sequence[Form]) -> Form:
    if len(coeffs) != len(forms):
        raise ValueError("coefficient and form lists have different lengths")
    if not forms:
        raise ValueError("empty linear combination")
    first = forms[0]
    out: dict = {}
    for c, f in zip(coeffs, forms):
        first._check_compatible(f)
        if f.degree != first.degree:
            raise DegreeError(f"degree mismatch: {f.degree} vs {first.degree}")
        c = first.field.coerce(c)
        for m, v in f.terms.items():
            out[m] = out.get(m, 0) + c * v
    return Form(first.gens, first.degree, out, first.field)


def substitute(f: Form, images: Sequence[Form], target_gens: GeneratorSet, field, cache=None) -> Form:
    """Algebra map sending generator i to ``images[i]`` (degree-1 forms), applied to f."""
    out: dict = {}
    for m, c in f.terms.items():
        img = cache.get(m) if cache is not None else None
        if img is None:
            img = target_gens.unit(field)
            for i in indices(m):
                img = wedge(img, images[i])
            if cache is not None:
                cache[m] = img
        for m2, v in img.terms.items():
            out[m2] = out.get(m2, 0) + c * v
    return Form(target_gens, f.degree, out, field)


def format_terms(f: Form) -> str:
    """Canonical text: terms in monomial order, explicit rational coefficients, ``^`` wedges."""
    if not f.terms:
        return "0"
    parts = []
    for m, c in f.sorted_terms():
        names = "^".join(f.gens.names[i] for i in indices(m))
        cstr = scalar_to_str(c)
        compound = (" + " in cstr) or (" - " in cstr)
        if compound:
            body = f"({cstr})" + (f" {names}" if names else "")
            sign = "+"
        else:
            sign = "-" if cstr.startswith("-") else "+"
            mag = cstr[1:] if sign == "-" else cstr
            if not names:
                body = mag
            elif mag == "1":
                body = names
            else:
                body = f"{mag} {names}"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text
