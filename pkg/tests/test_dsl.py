import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nilforge.cli import FIXTURES, bundled_fixture
from nilforge.dsl import ParseError, SemanticError, format_form, parse_form, parse_workspace, print_workspace, tokenize
from nilforge.errors import NilforgeError
from nilforge.lattice import PolyForm, Polynomial

N_SRC = (
    "algebra N { generators b1 b2 c1 c2 e1 e2 : 1; "
    "d e1 = -b1^c1 + b2^c1 + b1^c2 + 2 b2^c2; d e2 = 2 b1^c1 + b2^c1 + b1^c2 - b2^c2; }"
)


def test_parse_structure_equations():
    ws = parse_workspace(N_SRC)
    N = ws.algebras["N"]
    assert N.betti() == [1, 4, 8, 10, 8, 4, 1]
    assert format_form(N.diff["e1"]) == "-b1^c1 + b1^c2 + b2^c1 + 2 b2^c2"


def test_dangling_wedge_position():
    src = "algebra N {\n  generators b1 c1 e1 : 1;\n  d e1 = b1^;\n}\n"
    with pytest.raises(ParseError) as info:
        parse_workspace(src, "w.dga")
    err = info.value
    assert (err.file, err.line, err.column) == ("w.dga", 3, 13)
    assert err.found == "';'"
    assert "expected" in str(err) and str(err).startswith("w.dga:3:13:")


def test_parse_error_is_deterministic():
    src = "algebra N { generators a b : 1 d b = a; }"
    msgs = set()
    for _ in range(3):
        with pytest.raises(ParseError) as info:
            parse_workspace(src)
        msgs.add(str(info.value))
    assert msgs == {"<input>:1:32: expected ';', found 'd'"}


def test_comments_and_newlines_are_insignificant():
    spaced = N_SRC.replace(";", ";\n  # comment\n").replace("{", "{\n")
    assert parse_workspace(spaced) == parse_workspace(N_SRC)


def test_primed_names_tokenize():
    toks = tokenize("y1' z2'' -> ;")
    assert [t.text for t in toks[:-1]] == ["y1'", "z2''", "->", ";"]


@pytest.mark.parametrize(
    "src, fragment",
    [
        ("algebra A { generators x y : 1; d z = x^y; }", "unknown generator"),
        ("algebra A { generators x x : 1; }", "duplicate generator"),
        ("algebra A { generators x : 1; } algebra A { generators y : 1; }", "duplicate declaration"),
        ("algebra A { generators x y z : 1; d z = x; }", "degree 2"),
        ("algebra A { generators b1 b2 c1 e1 e2 : 1; d e1 = c1^e2; d e2 = b1^b2; }", "d^2"),
        ("algebra A { generators x y : 1; d y = sqrt(3) x^x; }", "Q(sqrt 3)"),
        ("algebra A { generators x y : 2; }", "degree-1"),
        ("form f on B = 0;", "unknown algebra"),
        ("algebra A { generators x : 1; } form x on A = x;", "shadows"),
        ("algebra A { generators x : 1; } query q : betti { algebra A; colour red; }", "unknown query parameter"),
        ("algebra A { generators x : 1; } query q : bogus { algebra A; }", "unknown query kind"),
        ("algebra A { generators x y : 1; } morphism m on A { x -> y; }", "no image"),
        ("algebra A { generators x y : 1; } form f on A = x + x^y;", "cannot add"),
        ("algebra A { generators x : 1; } form f on A = x / x;", "cannot divide"),
        ("algebra A { generators x : 1; } form f on A = x / 0;", "division by zero"),
        ("action r { matrix [[1, 2], [3]]; }", "square"),
        ("grouplaw g { coords x; rule y = x; }", "no rule"),
    ],
)
def test_semantic_errors_name_the_problem(src, fragment):
    with pytest.raises(SemanticError) as info:
        parse_workspace(src)
    assert fragment in str(info.value)


def test_quadratic_field_algebra():
    src = "algebra A { field Q(sqrt 3); generators x y z : 1; d z = (1/2 + 1/2 sqrt(3)) x^y; }"
    A = parse_workspace(src).algebras["A"]
    assert A.field.name == "Q(sqrt 3)"
    assert format_form(A.diff["z"]) == "(1/2 + 1/2 sqrt(3)) x^y"
    assert parse_workspace(print_workspace(parse_workspace(src))) == parse_workspace(src)


def test_format_omega_and_zero():
    ws = parse_workspace(bundled_fixture("m8.dga"))
    omega = ws.form("omega")
    assert format_form(omega) == "a1^a2 - b1^e2 + b2^e1 + c1^c2"
    # the textbook ordering of the same four terms parses to the same form
    M = ws.algebras["M"]
    assert parse_form("a1^a2 + e2^b1 - e1^b2 + c1^c2", M.gens) == omega
    assert format_form(M.gens.zero(2)) == "0"


def test_format_poly_form():
    coords = ("y1", "z1")
    f = PolyForm.dx(coords, "z1").scale(Polynomial.var(coords, "y1"))
    assert format_form(f) == "y1 dz1"


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_round_trip_is_byte_stable(name):
    ws = parse_workspace(bundled_fixture(name), name)
    text = print_workspace(ws)
    again = parse_workspace(text, name)
    assert again == ws
    assert print_workspace(again) == text


# --- random workspaces --------------------------------------------------------

coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def workspaces(draw):
    """Random two-step nilpotent algebras, forms on them and a morphism."""
    n_closed = draw(st.integers(2, 4))
    n_top = draw(st.integers(1, 2))
    closed = [f"x{i}" for i in range(1, n_closed + 1)]
    top = [f"z{i}" for i in range(1, n_top + 1)]
    quad = draw(st.booleans())
    lines = ["algebra A {"]
    if quad:
        lines.append("  field Q(sqrt 3);")
    lines.append(f"  generators {' '.join(closed + top)} : 1;")
    pairs = [(a, b) for i, a in enumerate(closed) for b in closed[i + 1 :]]
    for z in top:
        terms = draw(st.lists(st.tuples(coef, st.sampled_from(pairs)), min_size=0, max_size=3))
        body = " + ".join(f"({c}) {a}^{b}" for c, (a, b) in terms)
        if quad and terms:
            body += f" + sqrt(3) {pairs[0][0]}^{pairs[0][1]}"
        if body:
            lines.append(f"  d {z} = {body};")
    lines.append("}")
    gens = closed + top
    for k in range(draw(st.integers(0, 2))):
        terms = draw(st.lists(st.tuples(coef, st.sampled_from(gens), st.sampled_from(gens)), min_size=1, max_size=3))
        body = " + ".join(f"({c}) {a}^{b}" for c, a, b in terms)
        lines.append(f"form f{k} on A = {body};")
    scale = draw(st.sampled_from([1, -1, 2]))
    imgs = " ".join(f"{g} -> {scale} {g};" for g in closed) + " " + " ".join(f"{z} -> {scale * scale} {z};" for z in top)
    order = "" if scale != -1 else " order 2;"
    lines.append(f"morphism m on A {{ {imgs}{order} }}")
    lines.append("query q : betti { algebra A; }")
    return "\n".join(lines)


@settings(max_examples=60, deadline=None)
@given(workspaces())
def test_print_parse_round_trip(src):
    ws = parse_workspace(src)
    text = print_workspace(ws)
    assert parse_workspace(text) == ws
    assert print_workspace(parse_workspace(text)) == text


# --- totality -------------------------------------------------------------------

ALPHABET = "abcdexyz0123456789 ^+-*/(){}[];:,=#'\n"


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=ALPHABET, max_size=80))
def test_parser_total_on_noise(text):
    try:
        parse_workspace(text)
    except NilforgeError:
        pass


def test_parser_total_on_mutated_fixtures():
    rng = random.Random(12)
    sources = [bundled_fixture(n) for n in FIXTURES]
    for _ in range(300):
        src = rng.choice(sources)
        toks = tokenize(src)
        cut = rng.randrange(len(toks) - 1)
        t = toks[cut]
        # drop or duplicate one token
        lines = src.split("\n")
        line = lines[t.line - 1]
        col = t.col - 1
        if rng.random() < 0.5:
            line = line[:col] + line[col + len(t.text) :]
        else:
            line = line[:col] + t.text + " " + line[col:]
        lines[t.line - 1] = line
        try:
            parse_workspace("\n".join(lines))
        except NilforgeError:
            pass
