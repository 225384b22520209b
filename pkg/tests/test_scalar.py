from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nilforge.errors import FieldMismatchError
from nilforge.scalar import QQ, QuadExt, QuadField, field_of, is_squarefree, quad_arith, rat_arith, scalar_to_str

rationals = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 1000)
quads = st.builds(lambda a, b: QuadExt(a, b, 3), rationals, rationals)


def test_sqrt3_squares_to_three():
    r = QuadField(3).sqrt()
    assert r * r == 3
    assert (r * r).is_rational()


def test_inverse_of_golden_like_element():
    x = QuadExt(Fraction(1, 2), Fraction(1, 2), 3)
    y = 1 / x
    assert x * y == 1
    # (1/2 + 1/2 r)^-1 = -1 + r since (1/2 + 1/2 r)(-1 + r) = -1/2 + 3/2 = 1
    assert y == QuadExt(-1, 1, 3)


def test_mixing_fields_is_rejected():
    with pytest.raises(FieldMismatchError):
        QuadExt(0, 1, 3) + QuadExt(0, 1, 5)
    with pytest.raises(FieldMismatchError):
        quad_arith("mul", QuadExt(1, 1, 2), QuadExt(1, 1, 3))
    with pytest.raises(FieldMismatchError):
        QQ.coerce(QuadExt(0, 1, 3))


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        rat_arith("div", 1, 0)
    with pytest.raises(ZeroDivisionError):
        QuadExt(1, 1, 3) / QuadExt(0, 0, 3)


def test_squarefree_check():
    assert is_squarefree(3) and is_squarefree(6)
    assert not is_squarefree(4) and not is_squarefree(1) and not is_squarefree(12)
    with pytest.raises(ValueError):
        QuadField(9)


def test_rational_embedding_equality_and_hash():
    assert QuadExt(2, 0, 3) == 2
    assert hash(QuadExt(Fraction(1, 2), 0, 3)) == hash(Fraction(1, 2))
    assert field_of(QuadExt(2, 0, 3)) == QQ
    assert field_of(QuadExt(2, 1, 3)) == QuadField(3)


@pytest.mark.parametrize(
    "x, text",
    [
        (Fraction(-1, 3), "-1/3"),
        (QuadExt(Fraction(1, 2), Fraction(1, 2), 3), "1/2 + 1/2 sqrt(3)"),
        (QuadExt(Fraction(1, 2), Fraction(-1, 2), 3), "1/2 - 1/2 sqrt(3)"),
        (QuadExt(0, -1, 3), "-sqrt(3)"),
        (QuadExt(0, Fraction(2, 3), 3), "2/3 sqrt(3)"),
        (QuadExt(5, 0, 3), "5"),
    ],
)
def test_scalar_text(x, text):
    assert scalar_to_str(x) == text


@given(quads, quads, quads)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x
    assert x - x == 0


@given(quads)
def test_nonzero_elements_invert(x):
    if x:
        assert x * (1 / x) == 1
        assert x.norm() == (x * x.conjugate()).a


@given(rationals, rationals)
def test_rational_arith_matches_fraction(a, b):
    assert rat_arith("add", a, b) == a + b
    assert rat_arith("mul", a, b) == a * b
    if b:
        assert rat_arith("div", a, b) == a / b
