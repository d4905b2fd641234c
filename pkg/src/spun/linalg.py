"""Gaussian elimination over the rationals.

Matrices are plain lists of rows of :class:`Fraction`.  Nothing here
rounds; every rank and nullspace is exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]
Vector = list[Fraction]


def to_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(c) for c in r] for r in rows]


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row-echelon form and pivot columns; zero rows are dropped."""
    m = to_matrix(rows)
    ncols_all = len(m[0]) if m else 0
    if ncols is None:
        ncols = ncols_all
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        if r == len(m):
            break
        sel = next((i for i in range(r, len(m)) if m[i][col]), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        piv = m[r][col]
        if piv != 1:
            m[r] = [c / piv for c in m[r]]
        prow = m[r]
        nz = [k for k in range(col, ncols_all) if prow[k]]
        for i in range(len(m)):
            if i != r:
                f = m[i][col]
                if f:
                    row = m[i]
                    for k in nz:
                        row[k] -= f * prow[k]
        pivots.append(col)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis of {x : A x = 0}, one basis vector per free column."""
    return _null_from_rref(*rref(rows, ncols), ncols)


def _null_from_rref(r: Matrix, pivots: list[int], ncols: int) -> Matrix:
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, p in zip(r, pivots):
            v[p] = -row[free]
        basis.append(v)
    return basis


def solve_affine(
    rows: Sequence[Sequence], rhs: Sequence, ncols: int
) -> tuple[Vector, Matrix] | None:
    """Solve ``A x = b``.

    Returns ``(particular, nullspace basis)`` or ``None`` if inconsistent.
    The particular solution has zeros at every free column.
    """
    if len(rows) != len(rhs):
        raise ValueError("row count and rhs length differ")
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    r, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(r, pivots):
        x[p] = row[ncols]
    return x, _null_from_rref(r, pivots, ncols)


def solve_square(a: Sequence[Sequence], b: Sequence) -> Vector:
    """Unique solution of a nonsingular square system."""
    n = len(a)
    sol = solve_affine(a, b, n)
    if sol is None or sol[1]:
        raise ValueError("matrix is singular")
    return sol[0]


def det(a: Sequence[Sequence]) -> Fraction:
    m = to_matrix(a)
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("determinant needs a square matrix")
    out = Fraction(1)
    for col in range(n):
        sel = next((i for i in range(col, n) if m[i][col]), None)
        if sel is None:
            return Fraction(0)
        if sel != col:
            m[col], m[sel] = m[sel], m[col]
            out = -out
        piv = m[col][col]
        out *= piv
        for i in range(col + 1, n):
            f = m[i][col] / piv
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    return out


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> Vector:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def transpose(a: Sequence[Sequence]) -> Matrix:
    return [list(r) for r in zip(*a)]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((Fraction(x) * y for x, y in zip(u, v)), Fraction(0))


def sub(u: Sequence, v: Sequence) -> Vector:
    return [Fraction(x) - y for x, y in zip(u, v)]


def add(u: Sequence, v: Sequence) -> Vector:
    return [Fraction(x) + y for x, y in zip(u, v)]
