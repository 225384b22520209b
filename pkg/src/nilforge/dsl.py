"""Parser and printer for ``.dga`` workspace files.

Grammar (LL(1), newline-insensitive, ``#`` comments)::

    workspace   := statement*
    statement   := algebra | form | morphism | action | grouplaw | query
    algebra     := 'algebra' NAME ( '{' algstmt* '}' | '=' algexpr ';' )
    algstmt     := 'field' 'Q' [ '(' 'sqrt' INT ')' ] ';'
                 | 'generators' NAME+ ':' INT ';'
                 | 'd' NAME '=' expr ';'
    algexpr     := 'tensor' NAME NAME+ | 'rebase' NAME '{' (NAME '->' expr ';')* '}'
    form        := 'form' NAME 'on' NAME '=' expr ';'
    morphism    := 'morphism' NAME 'on' NAME '{' (NAME '->' expr ';' | 'order' INT ';')* '}'
    action      := 'action' NAME ( '{' actstmt* '}' | '=' 'product' NAME+ ';' )
    actstmt     := ('matrix' | 'lattice') matrix ';' | 'translation' vector ';' | 'order' INT ';'
    grouplaw    := 'grouplaw' NAME '{' lawstmt* '}'
    lawstmt     := 'coords' NAME+ ';' | 'rule' NAME '=' expr ';' | 'symmetry' matrix ';'
                 | 'lattice' expr 'mod' INT ';' | 'identity' vector ';'
    query       := 'query' NAME ':' NAME ('-' NAME)* '{' (NAME [expr (',' expr)*] ';')* '}'
    matrix      := '[' vector (',' vector)* ']'
    vector      := '[' expr (',' expr)* ']'
    expr        := ['+' | '-'] term (('+' | '-') term)*
    term        := factor (('*' | '/')? factor)*
    factor      := atom ('^' atom)*
    atom        := INT | NAME | 'sqrt' '(' INT ')' | '(' expr ')'

Juxtaposition multiplies (``2 b1^c1``); ``^`` is the wedge product, or a
power inside group-law rules. Primed names like ``y1'`` are single tokens.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any

from nilforge.cdga import DGA, tensor_product
from nilforge.errors import NilforgeError
from nilforge.exterior import Form, GeneratorSet, format_terms
from nilforge.lattice import (
    AffineTorusAction,
    Congruence,
    GroupLaw,
    PolyForm,
    Polynomial,
    product_action,
)
from nilforge.scalar import QQ, QuadExt, QuadField, scalar_to_str
from nilforge.symmetry import AlgebraMorphism, FiniteCyclicAction, change_of_basis


class ParseError(NilforgeError):
    def __init__(self, file, line, column, expected, found):
        self.file = file
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        super().__init__(f"{file}:{line}:{column}: expected {expected}, found {found}")


class SemanticError(NilforgeError):
    def __init__(self, message, file="<input>", line=None, column=None):
        self.file = file
        self.line = line
        self.column = column
        where = f"{file}:{line}:{column}: " if line is not None else f"{file}: "
        super().__init__(where + message)


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class Token:
    kind: str  # NAME, INT, SYM, EOF
    text: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        return f"{self.text!r}"


_SYMBOLS = ("->", "{", "}", "(", ")", "[", "]", ";", ",", ":", "=", "+", "-", "*", "/", "^")


def tokenize(text: str, file: str = "<input>") -> list:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isascii() and ch.isalpha():
            j = i
            while j < n and text[j].isascii() and text[j].isalnum():
                j += 1
            while j < n and text[j] == "'":
                j += 1
            tokens.append(Token("NAME", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isascii() and ch.isdigit():
            j = i
            while j < n and text[j].isascii() and text[j].isdigit():
                j += 1
            tokens.append(Token("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("SYM", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(file, line, col, "a token", repr(ch))
    tokens.append(Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Expression AST


@dataclass(frozen=True)
class Node:
    op: str  # num, sqrt, name, neg, +, -, *, /, ^
    args: tuple
    line: int
    col: int


# ---------------------------------------------------------------------------
# Workspace model


@dataclass
class Query:
    name: str
    kind: str
    params: dict = dc_field(default_factory=dict)
    line: int | None = None

    def __eq__(self, other):
        return (
            isinstance(other, Query)
            and (self.name, self.kind) == (other.name, other.kind)
            and self.params == other.params
        )


@dataclass
class NamedForm:
    algebra: str
    form: Form


@dataclass
class Workspace:
    algebras: dict = dc_field(default_factory=dict)
    forms: dict = dc_field(default_factory=dict)
    morphisms: dict = dc_field(default_factory=dict)
    orders: dict = dc_field(default_factory=dict)
    torus_actions: dict = dc_field(default_factory=dict)
    laws: dict = dc_field(default_factory=dict)
    queries: list = dc_field(default_factory=list)
    order: list = dc_field(default_factory=list)
    file: str = "<input>"

    def cyclic_action(self, name: str) -> FiniteCyclicAction:
        if name not in self.morphisms:
            raise SemanticError(f"unknown morphism {name!r}", self.file)
        if name not in self.orders:
            raise SemanticError(f"morphism {name!r} declares no order, so it is not an action", self.file)
        return FiniteCyclicAction(self.morphisms[name], self.orders[name], name)

    def algebra(self, name: str) -> DGA:
        try:
            return self.algebras[name]
        except KeyError:
            raise SemanticError(f"unknown algebra {name!r}", self.file) from None

    def form(self, name: str) -> Form:
        return self.forms[name].form

    def __eq__(self, other):
        if not isinstance(other, Workspace):
            return NotImplemented
        if self.order != other.order:
            return False
        if set(self.algebras) != set(other.algebras) or not all(
            self.algebras[k].is_equal(other.algebras[k]) for k in self.algebras
        ):
            return False
        if {k: (v.algebra, v.form) for k, v in self.forms.items()} != {
            k: (v.algebra, v.form) for k, v in other.forms.items()
        }:
            return False
        if self.orders != other.orders or set(self.morphisms) != set(other.morphisms):
            return False
        for k, m in self.morphisms.items():
            o = other.morphisms[k]
            if m.source.name != o.source.name or m.images != o.images:
                return False
        if self.torus_actions != other.torus_actions:
            return False
        if set(self.laws) != set(other.laws) or any(
            not _laws_equal(self.laws[k], other.laws[k]) for k in self.laws
        ):
            return False
        return self.queries == other.queries


def _laws_equal(a: GroupLaw, b: GroupLaw) -> bool:
    return (
        a.coords == b.coords
        and a.components == b.components
        and a.symmetry == b.symmetry
        and a.congruences == b.congruences
        and a.identity == b.identity
    )


# ---------------------------------------------------------------------------
# Parser


_RESERVED = {"mod"}
_QUERY_NAME_KEYS = {"algebra", "invariant", "action", "law"}
_QUERY_INT_KEYS = {"degree", "arity", "samples", "seed", "chi", "order"}
_QUERY_FORM_KEYS = {"classes", "sigma", "forms"}
_QUERY_RAW_KEYS = {"expect"}
QUERY_KINDS = {
    "check",
    "betti",
    "cohomology",
    "cup",
    "massey3",
    "massey-system",
    "massey4-cert",
    "fixed-points",
    "euler",
    "degree-scan",
    "d-equals",
    "closed",
    "invariant-form",
    "symplectic",
}


class Parser:
    def __init__(self, text: str, file: str = "<input>"):
        self.file = file
        self.tokens = tokenize(text, file)
        self.pos = 0
        self.ws = Workspace(file=file)

    # -- token helpers -----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, expected: str):
        t = self.tok
        raise ParseError(self.file, t.line, t.col, expected, t.describe())

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("SYM", "NAME") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(repr(text))
        return self.advance()

    def name(self, what: str = "a name") -> Token:
        if self.tok.kind != "NAME":
            self.error(what)
        return self.advance()

    def integer(self) -> int:
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "INT":
            self.error("an integer")
        v = int(self.advance().text)
        return -v if neg else v

    def semantic(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise SemanticError(message, self.file, tok.line, tok.col)

    def declare(self, kind: str, tok: Token):
        if any(n == tok.text for _, n in self.ws.order):
            self.semantic(f"duplicate declaration of {tok.text!r}", tok)
        self.ws.order.append((kind, tok.text))

    # -- expressions ---------------------------------------------------------
    def expr(self) -> Node:
        t = self.tok
        if self.at("-"):
            self.advance()
            node = Node("neg", (self.term(),), t.line, t.col)
        else:
            if self.at("+"):
                self.advance()
            node = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance()
            node = Node(op.text, (node, self.term()), op.line, op.col)
        return node

    def _starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "NAME":
            return t.text not in _RESERVED
        return t.kind == "INT" or (t.kind == "SYM" and t.text == "(")

    def term(self) -> Node:
        node = self.factor()
        while True:
            t = self.tok
            if self.at("*") or self.at("/"):
                self.advance()
                node = Node(t.text, (node, self.factor()), t.line, t.col)
            elif self._starts_atom():
                node = Node("*", (node, self.factor()), t.line, t.col)
            else:
                return node

    def factor(self) -> Node:
        node = self.atom()
        while self.at("^"):
            t = self.advance()
            node = Node("^", (node, self.atom()), t.line, t.col)
        return node

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return Node("num", (Fraction(int(t.text)),), t.line, t.col)
        if t.kind == "NAME" and t.text == "sqrt":
            self.advance()
            self.expect("(")
            d = self.integer()
            self.expect(")")
            return Node("sqrt", (d,), t.line, t.col)
        if t.kind == "NAME" and t.text not in _RESERVED:
            self.advance()
            return Node("name", (t.text,), t.line, t.col)
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.error("a number, name, 'sqrt' or '('")

    def vector(self) -> list:
        self.expect("[")
        items = [self.expr()]
        while self.at(","):
            self.advance()
            items.append(self.expr())
        self.expect("]")
        return items

    def matrix(self) -> list:
        self.expect("[")
        rows = [self.vector()]
        while self.at(","):
            self.advance()
            rows.append(self.vector())
        self.expect("]")
        return rows

    # -- statements -----------------------------------------------------------
    def parse(self) -> Workspace:
        while self.tok.kind != "EOF":
            t = self.tok
            if self.at("algebra"):
                self.algebra_stmt()
            elif self.at("form"):
                self.form_stmt()
            elif self.at("morphism"):
                self.morphism_stmt()
            elif self.at("action"):
                self.action_stmt()
            elif self.at("grouplaw"):
                self.law_stmt()
            elif self.at("query"):
                self.query_stmt()
            else:
                raise ParseError(
                    self.file, t.line, t.col, "'algebra', 'form', 'morphism', 'action', 'grouplaw' or 'query'", t.describe()
                )
        return self.ws

    def algebra_stmt(self):
        self.expect("algebra")
        name_tok = self.name("an algebra name")
        self.declare("algebra", name_tok)
        name = name_tok.text
        if self.at("="):
            self.advance()
            if self.at("tensor"):
                self.advance()
                parts = [self.name("an algebra name")]
                parts.append(self.name("an algebra name"))
                while self.tok.kind == "NAME":
                    parts.append(self.advance())
                self.expect(";")
                algs = [self._algebra_ref(p) for p in parts]
                A = algs[0]
                for B in algs[1:]:
                    A = tensor_product(A, B)
                A.name = name
            elif self.at("rebase"):
                self.advance()
                base_tok = self.name("an algebra name")
                base = self._algebra_ref(base_tok)
                self.expect("{")
                subst = {}
                while not self.at("}"):
                    g = self.name("a new generator name")
                    self.expect("->")
                    e = self.expr()
                    self.expect(";")
                    if g.text in subst:
                        self.semantic(f"generator {g.text!r} defined twice", g)
                    subst[g.text] = self.eval_form(e, base)
                self.expect("}")
                self.expect(";")
                try:
                    A = change_of_basis(base, subst, name)
                except NilforgeError as exc:
                    self.semantic(f"algebra {name!r}: {exc}", name_tok)
            else:
                self.error("'tensor' or 'rebase'")
        else:
            self.expect("{")
            fieldobj = QQ
            gens = None
            diffs = []
            while not self.at("}"):
                if self.at("field"):
                    self.advance()
                    fieldobj = self.field_spec()
                    self.expect(";")
                elif self.at("generators"):
                    gtok = self.advance()
                    names = [self.name("a generator name")]
                    while self.tok.kind == "NAME":
                        names.append(self.advance())
                    self.expect(":")
                    deg_tok = self.tok
                    deg = self.integer()
                    self.expect(";")
                    if deg != 1:
                        self.semantic("only degree-1 generators are supported", deg_tok)
                    if gens is not None:
                        self.semantic("generators declared twice", gtok)
                    texts = [n.text for n in names]
                    if len(set(texts)) != len(texts):
                        self.semantic("duplicate generator names", gtok)
                    if {"sqrt", "mod"} & set(texts):
                        self.semantic("'sqrt' and 'mod' are reserved", gtok)
                    gens = GeneratorSet(texts)
                elif self.at("d"):
                    self.advance()
                    g = self.name("a generator name")
                    self.expect("=")
                    diffs.append((g, self.expr()))
                    self.expect(";")
                else:
                    self.error("'field', 'generators', 'd' or '}'")
            self.expect("}")
            if gens is None:
                self.semantic(f"algebra {name!r} declares no generators", name_tok)
            images = {}
            for g, e in diffs:
                if g.text not in gens:
                    self.semantic(f"d of unknown generator {g.text!r}", g)
                if g.text in images:
                    self.semantic(f"d({g.text}) given twice", g)
                f = self._eval_form_raw(e, gens, fieldobj, {})
                if f.degree != 2:
                    self.semantic(f"d({g.text}) must have degree 2, got {f.degree}", g)
                images[g.text] = f
            A = DGA(gens, images, fieldobj, name)
        from nilforge.cdga import verify_d2

        report = verify_d2(A)
        if not report.passed:
            self.semantic(f"algebra {name!r} fails d^2 = 0: " + "; ".join(report.violations), name_tok)
        self.ws.algebras[name] = A

    def field_spec(self):
        t = self.name("'Q'")
        if t.text != "Q":
            self.semantic("field must be Q or Q(sqrt d)", t)
        if self.at("("):
            self.advance()
            self.expect("sqrt")
            d_tok = self.tok
            d = self.integer()
            self.expect(")")
            try:
                return QuadField(d)
            except ValueError as exc:
                self.semantic(str(exc), d_tok)
        return QQ

    def _algebra_ref(self, tok: Token) -> DGA:
        if tok.text not in self.ws.algebras:
            self.semantic(f"unknown algebra {tok.text!r}", tok)
        return self.ws.algebras[tok.text]

    def form_stmt(self):
        self.expect("form")
        name_tok = self.name("a form name")
        self.declare("form", name_tok)
        self.expect("on")
        alg_tok = self.name("an algebra name")
        A = self._algebra_ref(alg_tok)
        if name_tok.text in A.gens:
            self.semantic(f"form name {name_tok.text!r} shadows a generator", name_tok)
        self.expect("=")
        e = self.expr()
        self.expect(";")
        self.ws.forms[name_tok.text] = NamedForm(alg_tok.text, self.eval_form(e, A))

    def morphism_stmt(self):
        self.expect("morphism")
        name_tok = self.name("a morphism name")
        self.declare("morphism", name_tok)
        self.expect("on")
        A = self._algebra_ref(self.name("an algebra name"))
        self.expect("{")
        images = {}
        order = None
        while not self.at("}"):
            if self.at("order"):
                self.advance()
                otok = self.tok
                order = self.integer()
                if order < 1:
                    self.semantic("order must be positive", otok)
                self.expect(";")
                continue
            g = self.name("a generator name or 'order'")
            self.expect("->")
            e = self.expr()
            self.expect(";")
            if g.text not in A.gens:
                self.semantic(f"unknown generator {g.text!r}", g)
            if g.text in images:
                self.semantic(f"image of {g.text!r} given twice", g)
            f = self.eval_form(e, A)
            if f.degree != 1:
                self.semantic(f"image of {g.text!r} must have degree 1", g)
            images[g.text] = f
        self.expect("}")
        missing = [g for g in A.gens.names if g not in images]
        if missing:
            self.semantic(f"morphism {name_tok.text!r} gives no image for {missing}", name_tok)
        phi = AlgebraMorphism(A, A, images, name_tok.text)
        self.ws.morphisms[name_tok.text] = phi
        if order is not None:
            self.ws.orders[name_tok.text] = order

    def action_stmt(self):
        self.expect("action")
        name_tok = self.name("an action name")
        self.declare("action", name_tok)
        name = name_tok.text
        if self.at("="):
            self.advance()
            self.expect("product")
            parts = [self.name("an action name")]
            while self.tok.kind == "NAME":
                parts.append(self.advance())
            self.expect(";")
            acts = []
            for p in parts:
                if p.text not in self.ws.torus_actions:
                    self.semantic(f"unknown action {p.text!r}", p)
                acts.append(self.ws.torus_actions[p.text])
            self.ws.torus_actions[name] = product_action(acts, name)
            return
        self.expect("{")
        mat = lat = trans = None
        order = 1
        while not self.at("}"):
            t = self.tok
            if self.at("matrix"):
                self.advance()
                mat = self._int_matrix(self.matrix(), t)
            elif self.at("lattice"):
                self.advance()
                lat = self._int_matrix(self.matrix(), t)
            elif self.at("translation"):
                self.advance()
                trans = [self.eval_rational(e) for e in self.vector()]
            elif self.at("order"):
                self.advance()
                order = self.integer()
            else:
                self.error("'matrix', 'lattice', 'translation', 'order' or '}'")
            self.expect(";")
        self.expect("}")
        if mat is None:
            self.semantic(f"action {name!r} has no matrix", name_tok)
        if lat is None:
            lat = [[int(i == j) for j in range(len(mat))] for i in range(len(mat))]
        try:
            self.ws.torus_actions[name] = AffineTorusAction(mat, lat, trans, order, name)
        except ValueError as exc:
            self.semantic(f"action {name!r}: {exc}", name_tok)

    def _int_matrix(self, rows, tok) -> list:
        out = []
        for r in rows:
            vals = [self.eval_rational(e) for e in r]
            if any(v.denominator != 1 for v in vals):
                self.semantic("matrix entries must be integers", tok)
            out.append([int(v) for v in vals])
        if any(len(r) != len(out) for r in out):
            self.semantic("matrix must be square", tok)
        return out

    def law_stmt(self):
        self.expect("grouplaw")
        name_tok = self.name("a group law name")
        self.declare("grouplaw", name_tok)
        self.expect("{")
        coords = None
        rules = {}
        sym = None
        congr = []
        ident = None
        while not self.at("}"):
            t = self.tok
            if self.at("coords"):
                self.advance()
                names = [self.name("a coordinate name")]
                while self.tok.kind == "NAME":
                    names.append(self.advance())
                coords = [n.text for n in names]
                if any("'" in c for c in coords) or len(set(coords)) != len(coords):
                    self.semantic("coordinate names must be distinct and unprimed", t)
            elif self.at("rule"):
                self.advance()
                c = self.name("a coordinate name")
                self.expect("=")
                rules[c.text] = (c, self.expr())
            elif self.at("symmetry"):
                self.advance()
                sym = self._int_matrix(self.matrix(), t)
            elif self.at("lattice"):
                self.advance()
                e = self.expr()
                self.expect("mod")
                mtok = self.tok
                mod = self.integer()
                if mod < 1:
                    self.semantic("modulus must be positive", mtok)
                if coords is None:
                    self.semantic("declare coords before lattice conditions", t)
                poly = self.eval_poly(e, coords)
                if poly.degree() > 1 or poly.coefficient([0] * len(coords)):
                    self.semantic("lattice condition must be a linear form", t)
                coeffs = []
                for i in range(len(coords)):
                    ex = [0] * len(coords)
                    ex[i] = 1
                    coeffs.append(poly.coefficient(ex))
                congr.append(Congruence(coeffs, mod))
            elif self.at("identity"):
                self.advance()
                ident = [self.eval_rational(e) for e in self.vector()]
            else:
                self.error("'coords', 'rule', 'symmetry', 'lattice', 'identity' or '}'")
            self.expect(";")
        self.expect("}")
        if coords is None:
            self.semantic("group law declares no coords", name_tok)
        variables = [f"{c}'" for c in coords] + list(coords)
        comps = []
        for c in coords:
            if c not in rules:
                self.semantic(f"no rule for coordinate {c!r}", name_tok)
            comps.append(self.eval_poly(rules[c][1], variables))
        for c, (tok, _) in rules.items():
            if c not in coords:
                self.semantic(f"rule for unknown coordinate {c!r}", tok)
        if sym is not None and len(sym) != len(coords):
            self.semantic("symmetry matrix has the wrong size", name_tok)
        self.ws.laws[name_tok.text] = GroupLaw(coords, comps, sym, congr, ident, name_tok.text)

    def query_stmt(self):
        self.expect("query")
        name_tok = self.name("a query name")
        self.declare("query", name_tok)
        self.expect(":")
        kind = self.name("a query kind").text
        while self.at("-"):
            self.advance()
            kind += "-" + self.name("a query kind").text
        if kind not in QUERY_KINDS:
            self.semantic(f"unknown query kind {kind!r}", name_tok)
        self.expect("{")
        raw = {}
        while not self.at("}"):
            key = self.name("a query parameter")
            values = []
            if not self.at(";"):
                values.append(self.expr())
                while self.at(","):
                    self.advance()
                    values.append(self.expr())
            self.expect(";")
            if key.text in raw:
                self.semantic(f"parameter {key.text!r} given twice", key)
            raw[key.text] = (key, values)
        self.expect("}")
        self.ws.queries.append(Query(name_tok.text, kind, self.resolve_params(raw), name_tok.line))

    def resolve_params(self, raw: dict) -> dict:
        params: dict = {}
        alg = None
        if "algebra" in raw:
            tok, vals = raw["algebra"]
            alg = self._single_name(tok, vals)
            if alg not in self.ws.algebras:
                self.semantic(f"unknown algebra {alg!r}", tok)
        for key, (tok, vals) in raw.items():
            if key in _QUERY_NAME_KEYS:
                v = self._single_name(tok, vals)
                table = {
                    "algebra": self.ws.algebras,
                    "invariant": self.ws.orders,
                    "action": self.ws.torus_actions,
                    "law": self.ws.laws,
                }[key]
                if v not in table:
                    self.semantic(f"unknown {key} {v!r}", tok)
                params[key] = v
            elif key in _QUERY_INT_KEYS:
                if len(vals) != 1:
                    self.semantic(f"{key} takes one integer", tok)
                q = self.eval_rational(vals[0])
                if q.denominator != 1:
                    self.semantic(f"{key} must be an integer", tok)
                params[key] = int(q)
            elif key in _QUERY_FORM_KEYS:
                if alg is None:
                    self.semantic(f"{key} needs an 'algebra' parameter", tok)
                params[key] = [self.eval_form(e, self.ws.algebras[alg]) for e in vals]
            elif key in _QUERY_RAW_KEYS:
                params[key] = [self.eval_literal(e) for e in vals]
            else:
                self.semantic(f"unknown query parameter {key!r}", tok)
        return params

    def _single_name(self, tok, vals) -> str:
        if len(vals) != 1 or vals[0].op != "name":
            self.semantic(f"{tok.text} takes a single name", tok)
        return vals[0].args[0]

    # -- evaluation ------------------------------------------------------------
    def eval_form(self, node: Node, A: DGA) -> Form:
        named = {k: v.form for k, v in self.ws.forms.items() if self.ws.algebras.get(v.algebra) is A}
        return self._eval_form_raw(node, A.gens, A.field, named)

    def _eval_form_raw(self, node: Node, gens, fieldobj, named) -> Form:
        v = _FormEvaluator(gens, fieldobj, named, self).eval(node)
        if not isinstance(v, Form):
            v = gens.unit(fieldobj).scale(_to_field(v, fieldobj, self, node))
        return v

    def eval_rational(self, node: Node) -> Fraction:
        v = _FormEvaluator(None, QQ, {}, self).eval_scalar(node)
        if isinstance(v, QuadExt):
            if v.b:
                self.semantic("expected a rational number", Token("SYM", "", node.line, node.col))
            v = v.a
        return Fraction(v)

    def eval_literal(self, node: Node):
        if node.op == "name":
            return node.args[0]
        if node.op == "neg" and node.args[0].op == "name":
            return "-" + node.args[0].args[0]
        return _FormEvaluator(None, QQ, {}, self).eval_scalar(node)

    def eval_poly(self, node: Node, variables) -> Polynomial:
        return _PolyEvaluator(tuple(variables), self).eval(node)


def _to_field(v, fieldobj, parser, node):
    try:
        return fieldobj.coerce(v)
    except NilforgeError:
        parser.semantic(f"scalar {scalar_to_str(v)} is not in {fieldobj.name}", Token("SYM", "", node.line, node.col))


class _FormEvaluator:
    def __init__(self, gens, fieldobj, named, parser):
        self.gens = gens
        self.field = fieldobj
        self.named = named
        self.p = parser

    def fail(self, node, message):
        self.p.semantic(message, Token("SYM", "", node.line, node.col))

    def eval_scalar(self, node):
        v = self.eval(node)
        if isinstance(v, Form):
            self.fail(node, "expected a scalar")
        return v

    def as_form(self, v, node):
        if isinstance(v, Form):
            return v
        if self.gens is None:
            self.fail(node, "forms are not allowed here")
        return self.gens.unit(self.field).scale(_to_field(v, self.field, self.p, node))

    def eval(self, node: Node) -> Any:
        op = node.op
        if op == "num":
            return node.args[0]
        if op == "sqrt":
            d = node.args[0]
            if isinstance(self.field, QuadField) and self.field.d == d:
                return QuadExt(0, 1, d)
            if self.gens is None:
                try:
                    return QuadExt(0, 1, d)
                except ValueError as exc:
                    self.fail(node, str(exc))
            self.fail(node, f"sqrt({d}) requires the field Q(sqrt {d}), not {self.field.name}")
        if op == "name":
            name = node.args[0]
            if self.gens is None:
                self.fail(node, f"unexpected name {name!r}")
            if name in self.named:
                return self.named[name]
            if name in self.gens:
                return self.gens.gen(name, self.field)
            self.fail(node, f"unknown generator or form {name!r}")
        if op == "neg":
            v = self.eval(node.args[0])
            return -v
        a = self.eval(node.args[0])
        b = self.eval(node.args[1])
        if op in "+-":
            if isinstance(a, Form) or isinstance(b, Form):
                a, b = self.as_form(a, node), self.as_form(b, node)
                if a.degree != b.degree and a and b:
                    self.fail(node, f"cannot add forms of degree {a.degree} and {b.degree}")
                if a.degree != b.degree:
                    # one side is the zero form of another degree
                    return (a if a else b) if op == "+" else (a if a else -b)
            return a + b if op == "+" else a - b
        if op == "*":
            if isinstance(a, Form) and isinstance(b, Form):
                if a.degree and b.degree:
                    self.fail(node, "use '^' to multiply forms of positive degree")
                return a * b
            if isinstance(a, Form):
                return a.scale(_to_field(b, self.field, self.p, node))
            if isinstance(b, Form):
                return b.scale(_to_field(a, self.field, self.p, node))
            return a * b
        if op == "/":
            if isinstance(b, Form):
                if b.degree:
                    self.fail(node, "cannot divide by a form")
                b = b.terms.get(0, 0)
            if not b:
                self.fail(node, "division by zero")
            if isinstance(a, Form):
                return a.scale(self.field.one / _to_field(b, self.field, self.p, node))
            return Fraction(a) / b if not isinstance(a, QuadExt) else a / b
        if op == "^":
            return self.as_form(a, node).wedge(self.as_form(b, node))
        self.fail(node, f"unsupported operator {op}")


class _PolyEvaluator:
    def __init__(self, variables, parser):
        self.vars = variables
        self.p = parser

    def fail(self, node, message):
        self.p.semantic(message, Token("SYM", "", node.line, node.col))

    def eval(self, node: Node) -> Polynomial:
        op = node.op
        if op == "num":
            return Polynomial.const(self.vars, node.args[0])
        if op == "name":
            name = node.args[0]
            if name not in self.vars:
                self.fail(node, f"unknown variable {name!r}")
            return Polynomial.var(self.vars, name)
        if op == "sqrt":
            self.fail(node, "group laws have rational coefficients")
        if op == "neg":
            return -self.eval(node.args[0])
        a = self.eval(node.args[0])
        if op == "^":
            e = self.eval(node.args[1])
            if e.degree() > 0 or e.coefficient([0] * len(self.vars)).denominator != 1 or e.coefficient([0] * len(self.vars)) < 0:
                self.fail(node, "exponent must be a non-negative integer")
            out = Polynomial.const(self.vars, 1)
            for _ in range(int(e.coefficient([0] * len(self.vars)))):
                out = out * a
            return out
        b = self.eval(node.args[1])
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b.degree() > 0 or not b:
                self.fail(node, "can only divide by a nonzero number")
            return a * Polynomial.const(self.vars, 1 / b.coefficient([0] * len(self.vars)))
        self.fail(node, f"unsupported operator {op}")


# ---------------------------------------------------------------------------
# Public entry points


def parse_workspace(text: str, file: str = "<input>") -> Workspace:
    return Parser(text, file).parse()


def load_workspace(path) -> Workspace:
    from pathlib import Path

    p = Path(path)
    return parse_workspace(p.read_text(encoding="utf-8"), str(p))


def parse_form(text: str, gens: GeneratorSet, fieldobj=QQ, named: dict | None = None) -> Form:
    """Parse a single form expression over the given generators."""
    parser = Parser(text, "<form>")
    node = parser.expr()
    if parser.tok.kind != "EOF":
        parser.error("end of expression")
    return parser._eval_form_raw(node, gens, fieldobj, named or {})


def parse_form_in(ws: Workspace, algebra: str, text: str) -> Form:
    """Parse a form over a workspace algebra; named forms on that algebra may appear."""
    parser = Parser(text, "<argument>")
    parser.ws = ws
    if algebra not in ws.algebras:
        raise SemanticError(f"unknown algebra {algebra!r}", ws.file)
    node = parser.expr()
    if parser.tok.kind != "EOF":
        parser.error("end of expression")
    return parser.eval_form(node, ws.algebras[algebra])


def format_form(f) -> str:
    """Canonical text of a Form or PolyForm."""
    if isinstance(f, PolyForm):
        return str(f)
    return format_terms(f)


def _field_text(fieldobj) -> str:
    return "Q" if fieldobj == QQ else f"Q(sqrt {fieldobj.d})"


def _matrix_text(rows) -> str:
    return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in rows) + "]"


def _literal_text(v) -> str:
    return v if isinstance(v, str) else scalar_to_str(v)


def print_workspace(ws: Workspace) -> str:
    """Canonical source text; ``parse_workspace(print_workspace(ws)) == ws``."""
    out = []
    for kind, name in ws.order:
        if kind == "algebra":
            A = ws.algebras[name]
            out.append(f"algebra {name} {{")
            if A.field != QQ:
                out.append(f"  field {_field_text(A.field)};")
            out.append(f"  generators {' '.join(A.gens.names)} : 1;")
            for g in A.gens.names:
                if A.diff[g]:
                    out.append(f"  d {g} = {format_terms(A.diff[g])};")
            out.append("}")
        elif kind == "form":
            nf = ws.forms[name]
            out.append(f"form {name} on {nf.algebra} = {format_terms(nf.form)};")
        elif kind == "morphism":
            phi = ws.morphisms[name]
            out.append(f"morphism {name} on {phi.source.name} {{")
            for g in phi.source.gens.names:
                out.append(f"  {g} -> {format_terms(phi.images[g])};")
            if name in ws.orders:
                out.append(f"  order {ws.orders[name]};")
            out.append("}")
        elif kind == "action":
            act = ws.torus_actions[name]
            out.append(f"action {name} {{")
            out.append(f"  matrix {_matrix_text(act.matrix)};")
            out.append(f"  lattice {_matrix_text(act.lattice)};")
            if any(act.translation):
                out.append("  translation [" + ", ".join(scalar_to_str(x) for x in act.translation) + "];")
            out.append(f"  order {act.order};")
            out.append("}")
        elif kind == "grouplaw":
            law = ws.laws[name]
            out.append(f"grouplaw {name} {{")
            out.append(f"  coords {' '.join(law.coords)};")
            for c, p in zip(law.coords, law.components):
                out.append(f"  rule {c} = {p};")
            if law.symmetry is not None:
                out.append(f"  symmetry {_matrix_text(law.symmetry)};")
            for cg in law.congruences:
                lin = Polynomial(law.coords, {
                    tuple(int(i == j) for j in range(law.m)): c for i, c in enumerate(cg.coeffs) if c
                })
                out.append(f"  lattice {lin} mod {cg.modulus};")
            if any(law.identity):
                out.append("  identity [" + ", ".join(scalar_to_str(x) for x in law.identity) + "];")
            out.append("}")
        elif kind == "query":
            q = next(q for q in ws.queries if q.name == name)
            out.append(f"query {q.name} : {q.kind} {{")
            for key, v in q.params.items():
                if isinstance(v, str):
                    text = v
                elif isinstance(v, int):
                    text = str(v)
                elif key in _QUERY_FORM_KEYS:
                    text = ", ".join(format_terms(f) for f in v)
                else:
                    text = ", ".join(_literal_text(x) for x in v)
                out.append(f"  {key} {text};")
            out.append("}")
    return "\n".join(out) + "\n"
