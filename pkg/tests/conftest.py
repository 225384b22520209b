from __future__ import annotations

import pytest

from nilforge.cdga import DGA, tensor_product
from nilforge.dsl import parse_workspace
from nilforge.cli import bundled_fixture
from nilforge.symmetry import AlgebraMorphism, FiniteCyclicAction, invariant_complex

N_TEXT = """
algebra N {
  generators b1 b2 c1 c2 e1 e2 : 1;
  d e1 = -b1^c1 + b2^c1 + b1^c2 + 2 b2^c2;
  d e2 = 2 b1^c1 + b2^c1 + b1^c2 - b2^c2;
}
"""

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def N():
    return parse_workspace(N_TEXT).algebras["N"]


@pytest.fixture(scope="session")
def T2():
    return DGA(["a1", "a2"], name="T2")


@pytest.fixture(scope="session")
def M(T2, N):
    return tensor_product(T2, N, "M")


def rho_on(A):
    imgs = {}
    for g in A.gens.names:
        stem, idx = g[:-1], g[-1]
        if idx == "1":
            imgs[g] = -A.gen(stem + "1") - A.gen(stem + "2")
        else:
            imgs[g] = A.gen(stem + "1")
    return FiniteCyclicAction(AlgebraMorphism(A, A, imgs, "rho"), 3, "rho")


@pytest.fixture(scope="session")
def rho(M):
    return rho_on(M)


@pytest.fixture(scope="session")
def Minv(M, rho):
    return invariant_complex(M, rho, "M^rho")


@pytest.fixture(scope="session")
def heis():
    return parse_workspace("algebra Heis { generators x y z : 1; d z = x^y; }").algebras["Heis"]


@pytest.fixture(scope="session")
def prop4():
    return parse_workspace(bundled_fixture("massey_prop4.dga"), "massey_prop4.dga")


@pytest.fixture(scope="session")
def rho_ws():
    return parse_workspace(bundled_fixture("rho.dga"), "rho.dga")


@pytest.fixture(scope="session")
def n6_ws():
    return parse_workspace(bundled_fixture("n6.dga"), "n6.dga")
