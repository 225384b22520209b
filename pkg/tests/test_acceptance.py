"""The thirteen acceptance criteria, one test each.

Every test records a ``criterion N: PASS|FAIL`` line that is printed on its own
and again in the terminal summary.
"""

import itertools
from contextlib import contextmanager
from fractions import Fraction

import conftest
import test_properties as props

from nilforge.dsl import format_form
from nilforge.lattice import (
    fixed_points,
    group_law_check,
    lattice_equivalent,
    orbifold_euler,
    product_action,
)
from nilforge.massey import massey_degree_scan, quad_nontriv_certificate, triple_massey
from nilforge.scalar import QuadField
from nilforge.symmetry import change_of_basis, fixed_cohomology_dimension

FIBER = [[1, 1], [3, 0]]


@contextmanager
def criterion(n, desc):
    try:
        yield
    except BaseException:
        _record(n, "FAIL", desc)
        raise
    _record(n, "PASS", desc)


def _record(n, status, desc):
    line = f"criterion {n}: {status} - {desc}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)


def test_criterion_01_betti_of_N(N):
    with criterion(1, "Betti table of N is (1,4,8,10,8,4,1)"):
        assert N.betti() == [1, 4, 8, 10, 8, 4, 1]


def test_criterion_02_betti_of_M(M):
    with criterion(2, "Betti table of M is (1,6,17,30,36,30,17,6,1), chi = 0"):
        assert M.betti() == [1, 6, 17, 30, 36, 30, 17, 6, 1]
        assert M.euler() == 0


def test_criterion_03_invariant_betti(M, rho, Minv):
    with criterion(3, "invariant Betti (1,0,13,0,26,0,13,0,1), both paths agree"):
        direct = Minv.betti()
        assert direct == [1, 0, 13, 0, 26, 0, 13, 0, 1]
        assert [fixed_cohomology_dimension(M, rho, k) for k in range(9)] == direct


def test_criterion_04_symplectic_form(rho_ws):
    with criterion(4, "omega is closed, rho-invariant and omega^4 != 0"):
        M = rho_ws.algebras["M"]
        omega = rho_ws.form("omega")
        rho = rho_ws.cyclic_action("rho")
        assert not M.differential(omega)
        assert rho.generator.apply(omega) == omega
        top = omega * omega * omega * omega
        assert top.degree == 8 and top


def test_criterion_05_fixed_points(rho_ws):
    with criterion(5, "fixed points 3 on the square torus, 3 on the skew fiber, 81 in total"):
        base, fib = rho_ws.torus_actions["r"], rho_ws.torus_actions["rf"]
        assert [list(r) for r in fib.lattice] == FIBER
        third = Fraction(1, 3)
        assert fixed_points(base) == [(0, 0), (third, third), (2 * third, 2 * third)]
        pts = fixed_points(fib)
        assert len(pts) == 3
        for p, q in zip(pts, [(0, 0), (1, 0), (2, 0)]):
            assert lattice_equivalent(p, q, FIBER)
        assert len(fixed_points(product_action([base, base, base, fib]))) == 81
        assert len(fixed_points(rho_ws.torus_actions["rhoM"])) == 81


def test_criterion_06_orbifold_euler(M, Minv):
    with criterion(6, "orbifold Euler characteristic 54 equals the invariant alternating sum"):
        chi = orbifold_euler(M.euler(), 3, [3] * 81)
        assert chi == 54
        assert sum((-1) ** k * b for k, b in enumerate(Minv.betti())) == chi


def test_criterion_07_massey_primitives(prop4):
    with criterion(7, "d(xi) = cc^bb, d(vs) = bb^a4, both rho-invariant"):
        M = prop4.algebras["M"]
        rho = prop4.cyclic_action("rho")
        xi, vs, cc, bb, a4 = (prop4.form(n) for n in ("xi", "vs", "cc", "bb", "a4"))
        assert M.differential(xi) == cc * bb
        assert M.differential(vs) == bb * a4
        assert rho.generator.apply(xi) == xi
        assert rho.generator.apply(vs) == vs


def test_criterion_08_quadruple_certificate(prop4):
    with criterion(8, "quadruple certificate valid, [sigma] u [Psi0] = -1/3 top class"):
        C = prop4.algebras["M"]
        from nilforge.symmetry import invariant_complex

        Cinv = invariant_complex(C, prop4.cyclic_action("rho"))
        forms = [prop4.form(n) for n in ("cc", "bb", "bb", "a4")]
        cert = quad_nontriv_certificate(Cinv, forms, prop4.form("sg"))
        assert [c.passed for c in cert.checklist] == [True] * 4
        assert cert.verdict == "valid"
        assert cert.top_multiple == Fraction(-1, 3)


def _heisenberg_oracle():
    """Exhaustive linear algebra on the 8-dimensional complex of d z = x^y.

    Works on {index tuple: coefficient} dictionaries with the helpers from the
    tuple-based oracle, without touching the library. Returns whether the value
    of <x, x, y> is non-exact, the value, and the non-exact part of the
    indeterminacy x.H1 + H1.y.
    """
    import test_cdga as o

    X, Y, Z = 0, 1, 2
    dgen = {X: {}, Y: {}, Z: {(X, Y): Fraction(1)}}
    one = Fraction(1)

    def wedge(f, g):
        out = {}
        for a, c in f.items():
            for b, e in g.items():
                sgn, key = o.o_sort(a + b)
                if key is not None:
                    o.o_add(out, key, c * e * sgn)
        return out

    def bar(f):  # degree-1 forms: abar = -a
        return {k: -c for k, c in f.items()}

    def vec(f):
        basis = list(itertools.combinations(range(3), 2))
        return [f.get(m, Fraction(0)) for m in basis]

    x, y = {(X,): one}, {(Y,): one}
    # a12 with d a12 = xbar^x = 0, a23 with d a23 = xbar^y = -x^y
    a12, a23 = {}, {(Z,): -one}
    assert o.o_d(a23, dgen) == wedge(bar(x), y)
    value = {}
    for key, c in list(wedge(bar(x), a23).items()) + list(wedge(bar(a12), y).items()):
        o.o_add(value, key, c)

    exact = o.o_matrix(dgen, 3, 1)  # images of x, y, z
    base = o.o_rank(exact)
    nontrivial = o.o_rank(exact + [vec(value)]) > base
    closed1 = [{(g,): one} for g in (X, Y, Z) if not o.o_d({(g,): one}, dgen)]
    spread = [wedge(x, h) for h in closed1] + [wedge(h, y) for h in closed1]
    indeterminacy = [f for f in spread if o.o_rank(exact + [vec(f)]) > base]
    return nontrivial, value, indeterminacy


def test_criterion_09_negative_controls(prop4, heis):
    with criterion(9, "T8 certificate fails condition 4; Heisenberg triple is {+-[x^z]}"):
        T8 = prop4.algebras["T8"]
        parse = T8.parse
        cert = quad_nontriv_certificate(
            T8,
            [parse("c1^c2"), parse("b1^b2"), parse("b1^b2"), parse("a1^c1 + a2^c1 + a2^c2")],
            parse("2 a1^c2 - a2^c1 + a1^c1 + a2^c2"),
        )
        assert cert.verdict != "valid"
        assert not cert.checklist[3].passed

        nontrivial, value, oracle_ind = _heisenberg_oracle()
        assert nontrivial and oracle_ind == [] and value == {(0, 2): 1}
        x, y, z = heis.gen("x"), heis.gen("y"), heis.gen("z")
        r = triple_massey(heis, x, x, y)
        assert not r.trivial and r.indeterminacy == []
        assert r.value == heis.class_of(x * z) or r.value == heis.class_of(-(x * z))


def test_criterion_10_degree_scan(Minv):
    with criterion(10, "degree scan leaves only the quadruple product of degree-2 classes"):
        scan = massey_degree_scan(Minv.betti(), 6)
        assert scan["survivors"] == [(4, (2, 2, 2, 2))]


def test_criterion_11_property_suites(N, M, rho, Minv):
    with criterion(11, f"property suites on N, M, invariant complex, {props.CASES} seeded cases each"):
        assert props.CASES >= 100
        settings = [("N", N, conftest.rho_on(N)), ("M", M, rho), ("Minv", Minv, rho)]
        checks = [
            props.test_d_squared_vanishes,
            props.test_leibniz_rule,
            props.test_graded_commutativity,
            props.test_projector_idempotence,
            props.test_cup_independent_of_representatives,
            props.test_triple_massey_coset_invariance,
            props.test_poincare_pairing_full_rank,
        ]
        for check, setting in itertools.product(checks, settings):
            check(setting)


def test_criterion_12_change_of_basis(N, n6_ws):
    with criterion(12, "change of basis over Q(sqrt 3) gives d th1 = mu1^nu1 - mu2^nu2"):
        H = n6_ws.algebras["H"]
        h = {n: H.gen(n) for n in H.gens.names}
        assert H.field == QuadField(3)
        assert H.diff["th1"] == h["mu1"] * h["nu1"] - h["mu2"] * h["nu2"]
        assert H.diff["th2"] == h["mu1"] * h["nu2"] + h["mu2"] * h["nu1"]
        assert all(not H.diff[n] for n in ("mu1", "mu2", "nu1", "nu2"))
        assert H.betti() == N.betti()
        # an explicit substitution agrees with the fixture's rebase
        K = QuadField(3)
        r, half = K.sqrt(), Fraction(1, 2)
        Nq = N.extend_scalars(K)
        g = {n: Nq.gen(n) for n in Nq.gens.names}
        sub = {
            "mu1": g["b1"] + g["b2"].scale(half + half * r),
            "mu2": g["b1"] + g["b2"].scale(half - half * r),
            "nu1": g["c1"] + g["c2"].scale(half + half * r),
            "nu2": g["c1"] + g["c2"].scale(half - half * r),
            "th1": g["e1"].scale(2 / r) + g["e2"].scale(1 / r),
            "th2": g["e2"],
        }
        explicit = change_of_basis(Nq, sub, "H")
        assert all(format_form(explicit.diff[n]) == format_form(H.diff[n]) for n in H.gens.names)


def test_criterion_13_group_law(n6_ws):
    with criterion(13, "group law: associativity, identity, inverse, equivariance, lattice on 100 tuples"):
        report = group_law_check(n6_ws.laws["mG"], samples=100, seed=0)
        assert report.passed, report.violations
        names = ("associativity", "identity", "inverse", "equivariance", "lattice")
        assert report.details["passed"] == {k: 100 for k in names}
