"""Exact rank, kernel and row-space computations over the rationals.

Elimination is fraction-free (Bareiss) on an integer copy of the matrix;
fractions only appear when the echelon form is normalised.  Pivots are the
first nonzero entry in canonical row order, so bases are deterministic.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from fractions import Fraction

Matrix = Sequence[Sequence[Fraction]]


def _integer_rows(rows: Matrix) -> list[list[int]]:
    out = []
    for row in rows:
        row = [Fraction(x) for x in row]
        scale = math.lcm(*(x.denominator for x in row)) if row else 1
        out.append([int(x * scale) for x in row])
    return out


def bareiss_echelon(rows: Matrix, ncols: int | None = None) -> tuple[list[list[int]], list[int]]:
    """Integer row-echelon form and pivot columns."""
    m = _integer_rows(rows)
    ncols = len(m[0]) if m else (ncols or 0)
    prev = 1
    r = 0
    pivots: list[int] = []
    for c in range(ncols):
        if r == len(m):
            break
        pick = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pick is None:
            continue
        m[r], m[pick] = m[pick], m[r]
        piv = m[r][c]
        for i in range(r + 1, len(m)):
            lead = m[i][c]
            for j in range(ncols):
                num = piv * m[i][j] - lead * m[r][j]
                q, rem = divmod(num, prev)
                assert rem == 0, "Bareiss division must be exact"
                m[i][j] = q
        prev = piv
        pivots.append(c)
        r += 1
    return m[: len(pivots)], pivots


def rank(rows: Matrix) -> int:
    return len(bareiss_echelon(rows)[1])


def rref(rows: Matrix, ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row-echelon form (nonzero rows only) and pivot columns."""
    ech, pivots = bareiss_echelon(rows, ncols)
    red = [[Fraction(x, row[c]) for x in row] for row, c in zip(ech, pivots)]
    for r in range(len(red) - 1, -1, -1):
        c = pivots[r]
        for above in range(r):
            f = red[above][c]
            if f:
                red[above] = [a - f * b for a, b in zip(red[above], red[r])]
    return red, pivots


def nullspace(rows: Matrix, ncols: int) -> list[list[Fraction]]:
    """Basis of {v : A v = 0}, one vector per free column."""
    if not rows:
        return [[Fraction(int(n == c)) for n in range(ncols)] for c in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, c in zip(red, pivots):
            v[c] = -row[f]
        basis.append(v)
    return basis


def row_basis(rows: Matrix) -> list[list[Fraction]]:
    return rref(rows)[0]


def solve(rows: Matrix, rhs: Sequence[Fraction]) -> list[Fraction] | None:
    """One solution of ``A x = rhs`` (free variables set to zero), or None."""
    ncols = len(rows[0]) if rows else 0
    aug = [list(row) + [Fraction(b)] for row, b in zip(rows, rhs)]
    red, pivots = rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for row, c in zip(red, pivots):
        x[c] = row[ncols]
    return x


def transpose(rows: Matrix) -> list[list[Fraction]]:
    return [list(col) for col in zip(*rows)]


def matvec(rows: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in rows]
