"""Exact dense Gaussian elimination over Q or Q(sqrt d).

Matrices are lists of row lists. Pivoting is deterministic: the pivot in each
column is the first row (from the top of the unreduced block) with a nonzero
entry, so results depend only on the input.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from nilforge.errors import SingularMatrixError


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row-echelon form. Returns ``(nonzero_rows, pivot_columns)``."""
    m = [list(r) for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    nrows = len(m)
    for c in range(ncols):
        if r >= nrows:
            break
        p = next((i for i in range(r, nrows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pr = m[r]
        inv = Fraction(1) / pr[c]
        if inv != 1:
            pr = [x * inv for x in pr]
            m[r] = pr
        for i in range(nrows):
            if i != r:
                f = m[i][c]
                if f:
                    row = m[i]
                    m[i] = [a - f * b if b else a for a, b in zip(row, pr)]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(rows, ncols)[1])


def transpose(mat: Sequence[Sequence], nrows_out: int | None = None) -> list:
    if not mat:
        return [[] for _ in range(nrows_out or 0)]
    return [list(col) for col in zip(*mat)]


def nullspace(mat: Sequence[Sequence], ncols: int, zero=0, one=1) -> list:
    """Canonical basis of ``{x : mat x = 0}``: one vector per free column, in order."""
    if not mat:
        return [[one if i == j else zero for i in range(ncols)] for j in range(ncols)]
    r, pivots = rref(mat, ncols)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [zero] * ncols
        v[f] = one
        for row, p in zip(r, pivots):
            if row[f]:
                v[p] = -row[f]
        basis.append(v)
    return basis


def solve(mat: Sequence[Sequence], rhs: Sequence, ncols: int, zero=0):
    """Particular solution of ``mat x = rhs`` with free variables set to zero, or None."""
    if not mat:
        return [zero] * ncols if all(not b for b in rhs) else None
    aug = [list(row) + [b] for row, b in zip(mat, rhs)]
    r, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [zero] * ncols
    for row, p in zip(r, pivots):
        x[p] = row[ncols]
    return x


def mat_vec(mat: Sequence[Sequence], vec: Sequence, zero=0) -> list:
    out = []
    for row in mat:
        s = zero
        for a, b in zip(row, vec):
            if a and b:
                s = s + a * b
        out.append(s)
    return out


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence], zero=0) -> list:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col) if x and y), zero) for col in bt] for row in a]


def identity(n: int, zero=0, one=1) -> list:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def inverse(mat: Sequence[Sequence], zero=0, one=1) -> list:
    n = len(mat)
    aug = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(mat)]
    r, pivots = rref(aug, 2 * n)
    if len(pivots) < n or pivots[n - 1] >= n:
        raise SingularMatrixError("matrix is singular")
    return [row[n:] for row in r[:n]]


def determinant(mat: Sequence[Sequence]):
    m = [list(r) for r in mat]
    n = len(m)
    det = 1
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c]), None)
        if p is None:
            return 0
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det = det * m[c][c]
        inv = Fraction(1) / m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] * inv
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return det


def reduce_against(vec: Sequence, rows: Sequence[Sequence], pivots: Sequence[int]) -> list:
    """Subtract multiples of RREF rows so that ``vec`` vanishes on their pivot columns."""
    v = list(vec)
    for row, p in zip(rows, pivots):
        f = v[p]
        if f:
            v = [a - f * b if b else a for a, b in zip(v, row)]
    return v


def in_span(vec: Sequence, rows: Sequence[Sequence], pivots: Sequence[int]) -> bool:
    return not any(reduce_against(vec, rows, pivots))
