"""Exact scalars: rationals and elements of a real quadratic field Q(sqrt d).

Rationals are plain :class:`fractions.Fraction` values. Quadratic field elements
are :class:`QuadExt` instances ``a + b*sqrt(d)`` with rational ``a`` and ``b``.
A field object (:data:`QQ` or :class:`QuadField`) is attached to every form and
algebra so that mixing coefficient fields is caught early.
"""

from __future__ import annotations

import operator
from fractions import Fraction
from numbers import Rational as _RationalABC

from nilforge.errors import FieldMismatchError

__all__ = [
    "Fraction",
    "QuadExt",
    "RationalField",
    "QuadField",
    "QQ",
    "field_of",
    "is_squarefree",
    "rat_arith",
    "quad_arith",
    "scalar_to_str",
]


def is_squarefree(d: int) -> bool:
    if d < 2:
        return False
    p = 2
    while p * p <= d:
        if d % (p * p) == 0:
            return False
        p += 1
    return True


class QuadExt:
    """Element ``a + b*sqrt(d)`` of Q(sqrt d), immutable."""

    __slots__ = ("_a", "_b", "_d")

    def __init__(self, a=0, b=0, d: int = 3):
        if not is_squarefree(d):
            raise ValueError(f"d={d} is not a squarefree integer > 1")
        object.__setattr__(self, "_a", Fraction(a))
        object.__setattr__(self, "_b", Fraction(b))
        object.__setattr__(self, "_d", int(d))

    def __setattr__(self, name, value):
        raise AttributeError("QuadExt is immutable")

    @property
    def a(self) -> Fraction:
        return self._a

    @property
    def b(self) -> Fraction:
        return self._b

    @property
    def d(self) -> int:
        return self._d

    def _coerce(self, other):
        if isinstance(other, QuadExt):
            if other._d != self._d:
                raise FieldMismatchError(
                    f"cannot combine elements of Q(sqrt {self._d}) and Q(sqrt {other._d})"
                )
            return other
        if isinstance(other, (int, Fraction)) or isinstance(other, _RationalABC):
            return QuadExt(other, 0, self._d)
        return NotImplemented

    def conjugate(self) -> QuadExt:
        return QuadExt(self._a, -self._b, self._d)

    def norm(self) -> Fraction:
        return self._a * self._a - self._d * self._b * self._b

    def is_rational(self) -> bool:
        return self._b == 0

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self._a + o._a, self._b + o._b, self._d)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self._a - o._a, self._b - o._b, self._d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        a, b, c, e = self._a, self._b, o._a, o._b
        return QuadExt(a * c + self._d * b * e, a * e + b * c, self._d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        num = self * o.conjugate()
        return QuadExt(num._a / n, num._b / n, self._d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return QuadExt(-self._a, -self._b, self._d)

    def __pos__(self):
        return self

    def __bool__(self):
        return bool(self._a) or bool(self._b)

    def __eq__(self, other):
        if isinstance(other, QuadExt):
            return (self._a, self._b, self._d) == (other._a, other._b, other._d) or (
                self._b == 0 and other._b == 0 and self._a == other._a
            )
        if isinstance(other, (int, Fraction)):
            return self._b == 0 and self._a == other
        return NotImplemented

    def __hash__(self):
        if self._b == 0:
            return hash(self._a)
        return hash((self._a, self._b, self._d))

    def __repr__(self):
        return f"QuadExt({self._a}, {self._b}, d={self._d})"

    def __str__(self):
        return scalar_to_str(self)


class RationalField:
    """The field Q; coefficients are stored as Fractions."""

    name = "Q"
    d = None

    def coerce(self, x) -> Fraction:
        if isinstance(x, QuadExt):
            if x.b != 0:
                raise FieldMismatchError(f"{x} is not rational")
            return x.a
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, _RationalABC):
            return Fraction(x)
        raise TypeError(f"cannot interpret {x!r} as a rational scalar")

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def contains(self, x) -> bool:
        try:
            self.coerce(x)
        except (FieldMismatchError, TypeError):
            return False
        return True

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")

    def __repr__(self):
        return "QQ"


class QuadField:
    """The field Q(sqrt d); coefficients are stored as QuadExt."""

    def __init__(self, d: int):
        if not is_squarefree(d):
            raise ValueError(f"d={d} is not a squarefree integer > 1")
        self.d = int(d)

    @property
    def name(self) -> str:
        return f"Q(sqrt {self.d})"

    def coerce(self, x) -> QuadExt:
        if isinstance(x, QuadExt):
            if x.d != self.d:
                raise FieldMismatchError(f"{x!r} does not lie in {self.name}")
            return x
        if isinstance(x, (int, Fraction)) or isinstance(x, _RationalABC):
            return QuadExt(x, 0, self.d)
        raise TypeError(f"cannot interpret {x!r} as a scalar of {self.name}")

    @property
    def zero(self):
        return QuadExt(0, 0, self.d)

    @property
    def one(self):
        return QuadExt(1, 0, self.d)

    def sqrt(self) -> QuadExt:
        return QuadExt(0, 1, self.d)

    def contains(self, x) -> bool:
        try:
            self.coerce(x)
        except (FieldMismatchError, TypeError):
            return False
        return True

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.d == self.d

    def __hash__(self):
        return hash(("Q", self.d))

    def __repr__(self):
        return f"QuadField({self.d})"


QQ = RationalField()


def field_of(x):
    """Smallest field object containing the scalar ``x``."""
    if isinstance(x, QuadExt) and x.b != 0:
        return QuadField(x.d)
    return QQ


_OPS = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
}


def rat_arith(op: str, x, y=None) -> Fraction:
    x = Fraction(x)
    if op == "neg":
        return -x
    y = Fraction(y)
    if op == "div" and y == 0:
        raise ZeroDivisionError("rational division by zero")
    return _OPS[op](x, y)


def quad_arith(op: str, x: QuadExt, y: QuadExt | None = None) -> QuadExt:
    if op == "neg":
        return -x
    if isinstance(x, QuadExt) and isinstance(y, QuadExt) and x.d != y.d:
        raise FieldMismatchError(f"mismatched fields Q(sqrt {x.d}) and Q(sqrt {y.d})")
    return _OPS[op](x, y)


def _frac_str(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def scalar_to_str(x) -> str:
    """Render a scalar in the decimal-free DSL syntax (``-1/2 + 1/2 sqrt(3)``)."""
    if isinstance(x, QuadExt):
        if x.b == 0:
            return _frac_str(x.a)
        root = f"sqrt({x.d})"
        if x.b == 1:
            irr = root
        elif x.b == -1:
            irr = f"-{root}"
        else:
            irr = f"{_frac_str(x.b)} {root}"
        if x.a == 0:
            return irr
        if irr.startswith("-"):
            return f"{_frac_str(x.a)} - {irr[1:]}"
        return f"{_frac_str(x.a)} + {irr}"
    return _frac_str(Fraction(x))
