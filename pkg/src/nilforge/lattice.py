"""Affine torus actions, fixed points, orbifold Euler characteristic and group laws.

Also carries a small polynomial-coefficient differential form type on R^m,
enough to take exterior derivatives of coordinate expressions of invariant
1-forms.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as cartesian
from typing import Callable, Mapping, Sequence

from nilforge import linalg
from nilforge.cdga import CheckReport
from nilforge.errors import NilforgeError
from nilforge.exterior import Form, indices, merge_sign
from nilforge.scalar import scalar_to_str


# ---------------------------------------------------------------------------
# Smith normal form


def smith_normal_form(mat: Sequence[Sequence[int]]):
    """Return ``(U, D, V)`` with ``U @ mat @ V == D``; U, V unimodular, D diagonal.

    Diagonal entries are non-negative and each divides the next.
    """
    m = len(mat)
    n = len(mat[0]) if m else 0
    D = [[int(x) for x in row] for row in mat]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(M, a, b):
        M[a], M[b] = M[b], M[a]

    def swap_cols(M, a, b):
        for row in M:
            row[a], row[b] = row[b], row[a]

    def add_row(M, src, dst, k):
        M[dst] = [x + k * y for x, y in zip(M[dst], M[src])]

    def add_col(M, src, dst, k):
        for row in M:
            row[dst] += k * row[src]

    t = 0
    while t < min(m, n):
        nz = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        swap_rows(D, t, pi)
        swap_rows(U, t, pi)
        swap_cols(D, t, pj)
        swap_cols(V, t, pj)
        done = False
        while not done:
            done = True
            for i in range(t + 1, m):
                q = D[i][t] // D[t][t]
                if q:
                    add_row(D, t, i, -q)
                    add_row(U, t, i, -q)
                if D[i][t]:
                    swap_rows(D, t, i)
                    swap_rows(U, t, i)
                    done = False
            for j in range(t + 1, n):
                q = D[t][j] // D[t][t]
                if q:
                    add_col(D, t, j, -q)
                    add_col(V, t, j, -q)
                if D[t][j]:
                    swap_cols(D, t, j)
                    swap_cols(V, t, j)
                    done = False
            if done:
                # divisibility: fold any entry not divisible by the pivot into row t
                for i in range(t + 1, m):
                    if any(D[i][j] % D[t][t] for j in range(t + 1, n)):
                        add_row(D, i, t, 1)
                        add_row(U, i, t, 1)
                        done = False
                        break
        if D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return U, D, V


# ---------------------------------------------------------------------------
# Torus actions


@dataclass
class AffineTorusAction:
    """``x -> A x + b`` on ``R^m / L``; ``lattice`` lists the basis vectors of L as rows."""

    matrix: list
    lattice: list
    translation: list | None = None
    order: int = 1
    name: str | None = None

    def __post_init__(self):
        m = len(self.matrix)
        self.matrix = [[int(x) for x in row] for row in self.matrix]
        self.lattice = [[int(x) for x in row] for row in self.lattice]
        if self.translation is None:
            self.translation = [Fraction(0)] * m
        self.translation = [Fraction(x) for x in self.translation]
        if any(len(r) != m for r in self.matrix) or len(self.lattice) != m or len(self.translation) != m:
            raise ValueError("matrix, lattice and translation dimensions disagree")
        if linalg.determinant([[Fraction(x) for x in r] for r in self.lattice]) == 0:
            raise ValueError("lattice basis is degenerate")

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def lattice_matrix(self) -> list:
        """Columns are the lattice basis vectors."""
        return linalg.transpose(self.lattice)

    def lattice_coordinates(self, x: Sequence) -> list:
        Lm = [[Fraction(v) for v in row] for row in self.lattice_matrix()]
        return linalg.solve(Lm, [Fraction(v) for v in x], self.dim, Fraction(0))

    def in_lattice(self, x: Sequence) -> bool:
        return all(c.denominator == 1 for c in self.lattice_coordinates(x))

    def apply(self, x: Sequence) -> list:
        return [sum(a * Fraction(v) for a, v in zip(row, x)) + b for row, b in zip(self.matrix, self.translation)]

    def verify(self) -> CheckReport:
        violations = []
        for v in self.lattice:
            if not self.in_lattice(linalg.mat_vec(self.matrix, v)):
                violations.append(f"A maps lattice vector {v} outside the lattice")
        # order: A^n = id and the translation part of the n-th power lies in L
        x_lin = [list(map(Fraction, r)) for r in linalg.identity(self.dim)]
        shift = [Fraction(0)] * self.dim
        A = [[Fraction(x) for x in r] for r in self.matrix]
        for k in range(1, self.order + 1):
            x_lin = linalg.mat_mul(A, x_lin, Fraction(0))
            shift = [s + b for s, b in zip(linalg.mat_vec(A, shift, Fraction(0)), self.translation)]
            is_id = x_lin == linalg.identity(self.dim) and self.in_lattice(shift)
            if k < self.order and is_id:
                violations.append(f"map has order {k}, smaller than declared {self.order}")
                break
            if k == self.order and not is_id:
                violations.append(f"map raised to the power {self.order} is not the identity on the torus")
        return CheckReport("torus_action", not violations, violations)


def product_action(actions: Sequence[AffineTorusAction], name: str | None = None) -> AffineTorusAction:
    sizes = [a.dim for a in actions]
    m = sum(sizes)
    A = [[0] * m for _ in range(m)]
    L = [[0] * m for _ in range(m)]
    b = []
    off = 0
    for act in actions:
        for i in range(act.dim):
            for j in range(act.dim):
                A[off + i][off + j] = act.matrix[i][j]
                L[off + i][off + j] = act.lattice[i][j]
        b.extend(act.translation)
        off += act.dim
    order = 1
    for act in actions:
        order = order * act.order // _gcd(order, act.order)
    return AffineTorusAction(A, L, b, order, name)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def _frac_mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def fixed_points(act: AffineTorusAction) -> list:
    """All fixed points on the torus, reduced to lattice coordinates in [0, 1)^m.

    In lattice coordinates y (x = L y) the condition is ``(A' - I) y = -b' mod Z^m``
    with ``A' = L^-1 A L``; a Smith normal form ``U (A' - I) V = D`` decouples it.
    """
    m = act.dim
    Lm = [[Fraction(v) for v in row] for row in act.lattice_matrix()]
    Linv = linalg.inverse(Lm, Fraction(0), Fraction(1))
    Af = [[Fraction(v) for v in row] for row in act.matrix]
    A_lat = linalg.mat_mul(linalg.mat_mul(Linv, Af, Fraction(0)), Lm, Fraction(0))
    if any(x.denominator != 1 for row in A_lat for x in row):
        raise NilforgeError("the linear part does not preserve the lattice")
    shifted = [[int(A_lat[i][j]) - (1 if i == j else 0) for j in range(m)] for i in range(m)]
    if linalg.determinant([[Fraction(x) for x in r] for r in shifted]) == 0:
        raise NilforgeError("det(A - I) = 0: the fixed set is not isolated")
    b_lat = linalg.mat_vec(Linv, act.translation, Fraction(0))
    U, D, V = smith_normal_form(shifted)
    c = [-x for x in linalg.mat_vec(U, b_lat, Fraction(0))]
    ranges = []
    for i in range(m):
        d = D[i][i]
        ranges.append([(c[i] + k) / d for k in range(d)])
    points = set()
    for z in cartesian(*ranges):
        y = [_frac_mod1(v) for v in linalg.mat_vec(V, list(z), Fraction(0))]
        points.add(tuple(y))
    out = []
    for y in sorted(points):
        out.append(tuple(linalg.mat_vec(Lm, list(y), Fraction(0))))
    return out


def lattice_equivalent(p: Sequence, q: Sequence, lattice: Sequence[Sequence[int]]) -> bool:
    diff = [Fraction(a) - Fraction(b) for a, b in zip(p, q)]
    Lm = [[Fraction(v) for v in row] for row in linalg.transpose(lattice)]
    coords = linalg.solve(Lm, diff, len(diff), Fraction(0))
    return coords is not None and all(c.denominator == 1 for c in coords)


def orbifold_euler(chi: int, n: int, isotropy_orders: Sequence[int]) -> Fraction:
    """``chi / n + sum_p (1 - 1/|isotropy_p|)`` for an almost free cyclic action of order n."""
    if n < 1:
        raise ValueError("group order must be positive")
    total = Fraction(chi, n)
    for k in isotropy_orders:
        if k < 1 or n % k:
            raise ValueError(f"isotropy order {k} does not divide the group order {n}")
        total += 1 - Fraction(1, k)
    return total


# ---------------------------------------------------------------------------
# Polynomials and group laws


class Polynomial:
    """Sparse polynomial with rational coefficients over a fixed variable tuple."""

    __slots__ = ("vars", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, object] | None = None):
        self.vars = tuple(variables)
        clean = {}
        for e, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                if len(e) != len(self.vars):
                    raise ValueError("exponent length does not match variables")
                clean[tuple(e)] = clean.get(tuple(e), 0) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def const(cls, variables, c) -> Polynomial:
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, variables, name: str) -> Polynomial:
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, {tuple(e): 1})

    def _lift(self, other):
        if isinstance(other, Polynomial):
            if other.vars != self.vars:
                raise ValueError("polynomials over different variables")
            return other
        return Polynomial.const(self.vars, other)

    def __add__(self, other):
        o = self._lift(other)
        out = dict(self.terms)
        for e, c in o.terms.items():
            out[e] = out.get(e, 0) + c
        return Polynomial(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self.vars, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.const(self.vars, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def degree(self, var_indices: Sequence[int] | None = None) -> int:
        if not self.terms:
            return -1
        idx = range(len(self.vars)) if var_indices is None else var_indices
        return max(sum(e[i] for i in idx) for e in self.terms)

    def evaluate(self, values: Sequence) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for v, k in zip(values, e):
                if k:
                    t *= Fraction(v) ** k
            total += t
        return total

    def partial_eval(self, assignment: Mapping[int, object]) -> Polynomial:
        out: dict = {}
        for e, c in self.terms.items():
            t = c
            e2 = list(e)
            for i, v in assignment.items():
                if e[i]:
                    t *= Fraction(v) ** e[i]
                    e2[i] = 0
            out[tuple(e2)] = out.get(tuple(e2), 0) + t
        return Polynomial(self.vars, out)

    def derivative(self, i: int) -> Polynomial:
        out: dict = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = out.get(tuple(e2), 0) + c * e[i]
        return Polynomial(self.vars, out)

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = " ".join(
                v if k == 1 else f"{v}^{k}" for v, k in zip(self.vars, e) if k
            )
            mag = abs(c)
            body = mono if (mono and mag == 1) else (scalar_to_str(mag) + (f" {mono}" if mono else ""))
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    __repr__ = __str__


@dataclass
class Congruence:
    """``sum(coeffs[i] * v[i]) == 0 (mod modulus)`` on integer points."""

    coeffs: list
    modulus: int

    def holds(self, point: Sequence) -> bool:
        s = sum(Fraction(c) * Fraction(v) for c, v in zip(self.coeffs, point))
        return s.denominator == 1 and s.numerator % self.modulus == 0


class GroupLaw:
    """Polynomial multiplication ``m(p', p)`` on R^m.

    ``components[i]`` is a polynomial in the 2m variables ``coords'`` (the left
    factor p') followed by ``coords`` (the right factor p).
    """

    def __init__(
        self,
        coords: Sequence[str],
        components: Sequence[Polynomial],
        symmetry: Sequence[Sequence[int]] | None = None,
        congruences: Sequence[Congruence] = (),
        identity: Sequence | None = None,
        name: str | None = None,
    ):
        self.coords = tuple(coords)
        self.m = len(self.coords)
        self.variables = tuple(f"{c}'" for c in self.coords) + self.coords
        if len(components) != self.m:
            raise ValueError("need one component polynomial per coordinate")
        for p in components:
            if p.vars != self.variables:
                raise ValueError("component polynomials must use the primed and unprimed coordinates")
        self.components = list(components)
        self.symmetry = [list(map(int, r)) for r in symmetry] if symmetry is not None else None
        self.congruences = list(congruences)
        self.identity = [Fraction(x) for x in identity] if identity is not None else [Fraction(0)] * self.m
        self.name = name

    def multiply(self, left: Sequence, right: Sequence) -> list:
        vals = [Fraction(x) for x in left] + [Fraction(x) for x in right]
        return [p.evaluate(vals) for p in self.components]

    def inverse(self, p: Sequence) -> list | None:
        """Solve ``m(p, q) = e`` for q; requires the law to be affine in its right factor."""
        assignment = {i: Fraction(v) for i, v in enumerate(p)}
        right = list(range(self.m, 2 * self.m))
        rows, rhs = [], []
        for comp, e in zip(self.components, self.identity):
            q = comp.partial_eval(assignment)
            if q.degree(right) > 1:
                raise NilforgeError("law is not affine in the right factor; cannot solve for inverses")
            row = []
            for j in right:
                ex = [0] * (2 * self.m)
                ex[j] = 1
                row.append(q.coefficient(ex))
            rows.append(row)
            rhs.append(e - q.coefficient([0] * (2 * self.m)))
        return linalg.solve(rows, rhs, self.m, Fraction(0))

    def act(self, p: Sequence) -> list:
        return [sum(a * Fraction(v) for a, v in zip(row, p)) for row in self.symmetry]

    def in_lattice(self, p: Sequence) -> bool:
        return all(Fraction(v).denominator == 1 for v in p) and all(c.holds(p) for c in self.congruences)

    def relabeled(self, perm: Sequence[int]) -> GroupLaw:
        """Same law in coordinates reordered so that new coordinate i is old ``perm[i]``."""
        new_coords = [self.coords[i] for i in perm]
        new_vars = tuple(f"{c}'" for c in new_coords) + tuple(new_coords)
        pos = {v: i for i, v in enumerate(new_vars)}
        comps = []
        for i in perm:
            old = self.components[i]
            terms = {}
            for e, c in old.terms.items():
                e2 = [0] * len(new_vars)
                for j, k in enumerate(e):
                    if k:
                        e2[pos[self.variables[j]]] = k
                terms[tuple(e2)] = c
            comps.append(Polynomial(new_vars, terms))
        sym = None
        if self.symmetry is not None:
            sym = [[self.symmetry[i][j] for j in perm] for i in perm]
        congr = [Congruence([c.coeffs[i] for i in perm], c.modulus) for c in self.congruences]
        return GroupLaw(new_coords, comps, sym, congr, [self.identity[i] for i in perm], self.name)


def _random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 6))


def _random_lattice_point(law: GroupLaw, rng: random.Random, tries: int = 1000):
    for _ in range(tries):
        p = [rng.randint(-6, 6) for _ in range(law.m)]
        if law.in_lattice(p):
            return p
    raise NilforgeError("could not sample a lattice point satisfying the congruences")


def group_law_check(law: GroupLaw, samples: int = 100, seed: int = 0) -> CheckReport:
    """Randomised associativity, identity, inverse, equivariance and lattice checks."""
    rng = random.Random(seed)
    e = law.identity
    counts = {k: 0 for k in ("associativity", "identity", "inverse", "equivariance", "lattice")}
    first: dict = {}

    def fail(check, detail):
        first.setdefault(check, detail)

    for _ in range(samples):
        a, b, c = ([_random_rational(rng) for _ in range(law.m)] for _ in range(3))
        if law.multiply(law.multiply(a, b), c) == law.multiply(a, law.multiply(b, c)):
            counts["associativity"] += 1
        else:
            fail("associativity", (a, b, c))
        if law.multiply(e, a) == a and law.multiply(a, e) == a:
            counts["identity"] += 1
        else:
            fail("identity", (a,))
        q = law.inverse(a)
        if q is not None and law.multiply(a, q) == e and law.multiply(q, a) == e:
            counts["inverse"] += 1
        else:
            fail("inverse", (a,))
        if law.symmetry is not None:
            if law.multiply(law.act(a), law.act(b)) == law.act(law.multiply(a, b)):
                counts["equivariance"] += 1
            else:
                fail("equivariance", (a, b))
        g = _random_lattice_point(law, rng)
        h = _random_lattice_point(law, rng)
        ok = law.in_lattice(law.multiply(g, h))
        gi = law.inverse(g)
        ok = ok and gi is not None and law.in_lattice(gi)
        if law.symmetry is not None:
            ok = ok and law.in_lattice(law.act(g))
        if ok:
            counts["lattice"] += 1
        else:
            fail("lattice", (g, h))
    if law.symmetry is None:
        counts.pop("equivariance")
    violations = [
        f"{check} fails at {tuple(tuple(str(x) for x in p) for p in pts)}" for check, pts in first.items()
    ]
    return CheckReport("group_law", not violations, violations, {"samples": samples, "passed": counts})


# ---------------------------------------------------------------------------
# Polynomial-coefficient forms on R^m


class PolyForm:
    """Sum of polynomial multiples of wedges of coordinate differentials ``dx_i``."""

    __slots__ = ("coords", "terms")

    def __init__(self, coords: Sequence[str], terms: Mapping[int, Polynomial] | None = None):
        self.coords = tuple(coords)
        clean = {}
        for m, p in (terms or {}).items():
            if not isinstance(p, Polynomial):
                p = Polynomial.const(self.coords, p)
            if p:
                clean[m] = p
        self.terms = clean

    @classmethod
    def function(cls, coords, poly: Polynomial) -> PolyForm:
        return cls(coords, {0: poly})

    @classmethod
    def dx(cls, coords, name: str) -> PolyForm:
        coords = tuple(coords)
        return cls(coords, {1 << coords.index(name): Polynomial.const(coords, 1)})

    @classmethod
    def from_constant_form(cls, coords, f: Form, name_map: Mapping[str, str]) -> PolyForm:
        """Constant-coefficient form: generator ``g`` becomes ``dx_{name_map[g]}``."""
        coords = tuple(coords)
        out = cls(coords)
        for m, c in f.terms.items():
            term = cls.function(coords, Polynomial.const(coords, Fraction(c)))
            for i in indices(m):
                term = term.wedge(cls.dx(coords, name_map[f.gens.names[i]]))
            out = out + term
        return out

    def __add__(self, other: PolyForm) -> PolyForm:
        out = dict(self.terms)
        for m, p in other.terms.items():
            out[m] = out[m] + p if m in out else p
        return PolyForm(self.coords, out)

    def __neg__(self):
        return PolyForm(self.coords, {m: -p for m, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, PolyForm) and self.coords == other.coords and self.terms == other.terms

    def __hash__(self):
        return hash((self.coords, frozenset(self.terms.items())))

    def scale(self, poly) -> PolyForm:
        return PolyForm(self.coords, {m: p * poly for m, p in self.terms.items()})

    def wedge(self, other: PolyForm) -> PolyForm:
        out: dict = {}
        for m1, p1 in self.terms.items():
            for m2, p2 in other.terms.items():
                s = merge_sign(m1, m2)
                if not s:
                    continue
                prod = p1 * p2
                m = m1 | m2
                out[m] = out[m] + (prod if s > 0 else -prod) if m in out else (prod if s > 0 else -prod)
        return PolyForm(self.coords, out)

    def is_zero(self) -> bool:
        return not self.terms

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mp: (mp[0].bit_count(), indices(mp[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, p in self.sorted_terms():
            dxs = "^".join(f"d{self.coords[i]}" for i in indices(m))
            ptxt = str(p)
            if len(p.terms) > 1:
                body = f"({ptxt})" + (f" {dxs}" if dxs else "")
                sign = "+"
            else:
                sign = "-" if ptxt.startswith("-") else "+"
                mag = ptxt[1:] if sign == "-" else ptxt
                body = dxs if (mag == "1" and dxs) else (mag + (f" {dxs}" if dxs else ""))
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    __repr__ = __str__


def poly_form_differential(f: PolyForm) -> PolyForm:
    """Exterior derivative ``d(p dx_I) = sum_j dp/dx_j dx_j ^ dx_I``."""
    out = PolyForm(f.coords)
    for m, p in f.terms.items():
        for j in range(len(f.coords)):
            dp = p.derivative(j)
            if not dp:
                continue
            s = merge_sign(1 << j, m)
            if not s:
                continue
            out = out + PolyForm(f.coords, {m | (1 << j): dp if s > 0 else -dp})
    return out
