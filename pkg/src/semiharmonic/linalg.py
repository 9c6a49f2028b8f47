"""Exact null spaces over the rationals by fraction-free elimination."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


def _integer_row(row: Sequence) -> list[int]:
    den = 1
    for v in row:
        den = math.lcm(den, Fraction(v).denominator)
    ints = [int(Fraction(v) * den) for v in row]
    g = math.gcd(*ints)
    return [v // g for v in ints] if g > 1 else ints


def rref_integer(rows: Sequence[Sequence]) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form with integer rows.

    Each pivot row is scaled so its entries are coprime; pivots need not
    be 1.  Returns (rows, pivot_columns).
    """
    m = [_integer_row(r) for r in rows]
    m = [r for r in m if any(r)]
    ncols = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pr = m[r]
        for i in range(len(m)):
            if i != r and m[i][c]:
                a, b = pr[c], m[i][c]
                row = [a * x - b * y for x, y in zip(m[i], pr)]
                g = math.gcd(*row)
                m[i] = [x // g for x in row] if g > 1 else row
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    m = m[:r]
    for i, c in enumerate(pivots):
        if m[i][c] < 0:
            m[i] = [-x for x in m[i]]
    return m, pivots


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {v : A v = 0}, one vector per free column."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref_integer(rows)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row, c in zip(red, pivots):
            v[c] = Fraction(-row[free], row[c])
        basis.append(v)
    return basis


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return len(rref_integer(rows)[1])
