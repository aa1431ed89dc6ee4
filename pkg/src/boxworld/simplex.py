"""Exact rational linear feasibility.

Phase-1 simplex over `fractions.Fraction`: minimize the sum of artificial
variables for {z >= 0 : Az = b}. Bland's rule (lowest eligible index enters;
ties in the ratio test broken by lowest basic index) guarantees termination,
and exact pivots make the verdict and the returned point bit-exact.
Linearly dependent rows are handled; no preprocessing is required.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

FeasiblePoint = list


def lp_feasibility(rows: Sequence[Sequence], rhs: Sequence) -> FeasiblePoint | None:
    """Return z with Az = b, z >= 0 (exact), or None if no such z exists."""
    m = len(rows)
    b = [Fraction(v) for v in rhs]
    if len(b) != m:
        raise ValueError("rhs length does not match the number of rows")
    if m == 0:
        return []
    n = len(rows[0])
    A = []
    for row in rows:
        if len(row) != n:
            raise ValueError("ragged constraint matrix")
        A.append([Fraction(v) for v in row])
    if n == 0:
        return [] if all(v == 0 for v in b) else None

    for i in range(m):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]

    zero, one = Fraction(0), Fraction(1)
    width = n + m + 1
    tableau = [A[i] + [one if j == i else zero for j in range(m)] + [b[i]]
               for i in range(m)]
    basis = list(range(n, n + m))

    # Reduced costs for minimizing the artificial sum (c = 0 structural,
    # 1 artificial; artificials start basic).
    reduced = [zero] * width
    for j in range(n + m):
        col_sum = sum((tableau[i][j] for i in range(m)), zero)
        reduced[j] = (one if j >= n else zero) - col_sum

    while True:
        enter = next((j for j in range(n + m) if reduced[j] < 0), None)
        if enter is None:
            break
        leave = -1
        best = None
        for i in range(m):
            coeff = tableau[i][enter]
            if coeff > 0:
                ratio = tableau[i][-1] / coeff
                if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            # Objective is bounded below by 0; an unbounded column would
            # contradict exact arithmetic.
            raise ArithmeticError("phase-1 ratio test found no pivot row")
        pivot = tableau[leave][enter]
        if pivot != 1:
            tableau[leave] = [v / pivot for v in tableau[leave]]
        pivot_row = tableau[leave]
        for i in range(m):
            factor = tableau[i][enter]
            if i != leave and factor != 0:
                tableau[i] = [v - factor * w for v, w in zip(tableau[i], pivot_row)]
        factor = reduced[enter]
        if factor != 0:
            reduced = [v - factor * w for v, w in zip(reduced, pivot_row)]
        basis[leave] = enter

    residual = sum((tableau[i][-1] for i in range(m) if basis[i] >= n), zero)
    if residual != 0:
        return None
    point = [zero] * n
    for i in range(m):
        if basis[i] < n:
            point[basis[i]] = tableau[i][-1]
    return point
