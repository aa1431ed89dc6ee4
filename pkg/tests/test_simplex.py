"""Exact feasibility solver: verdicts and bit-exact certificates."""

import random
from fractions import Fraction as F

from boxworld import lp_feasibility


def _check_point(rows, rhs, point):
    assert point is not None
    assert all(w >= 0 for w in point)
    for row, b in zip(rows, rhs):
        assert sum((F(c) * w for c, w in zip(row, point)), F(0)) == F(b)


def test_single_row_feasible():
    rows, rhs = [[1, 1]], [1]
    _check_point(rows, rhs, lp_feasibility(rows, rhs))


def test_single_row_infeasible():
    assert lp_feasibility([[1, 1]], [-1]) is None


def test_conflicting_rows_infeasible():
    assert lp_feasibility([[1, 1], [1, 1]], [1, 2]) is None


def test_dependent_rows_are_fine():
    rows = [[1, 2, 0], [2, 4, 0], [0, 0, 1]]
    rhs = [F(1, 3), F(2, 3), F(5)]
    _check_point(rows, rhs, lp_feasibility(rows, rhs))


def test_zero_columns_edge():
    assert lp_feasibility([[0, 0]], [0]) is not None
    assert lp_feasibility([[0, 0]], [1]) is None


def test_fractional_certificates_are_exact():
    rows = [[F(1, 3), F(1, 6), F(1, 2)], [1, -1, 0]]
    rhs = [F(1, 4), F(0)]
    _check_point(rows, rhs, lp_feasibility(rows, rhs))


def test_random_constructed_systems():
    rng = random.Random(42)
    for _ in range(50):
        m, n = rng.randint(1, 5), rng.randint(1, 8)
        rows = [[F(rng.randint(-4, 4)) for _ in range(n)] for _ in range(m)]
        z0 = [F(rng.randint(0, 5), rng.randint(1, 3)) for _ in range(n)]
        rhs = [sum((c * z for c, z in zip(row, z0)), F(0)) for row in rows]
        _check_point(rows, rhs, lp_feasibility(rows, rhs))


def test_random_infeasible_by_sign():
    rng = random.Random(43)
    for _ in range(30):
        n = rng.randint(1, 6)
        rows = [[F(rng.randint(0, 4)) for _ in range(n)]]
        rhs = [F(-1 - rng.randint(0, 3))]
        assert lp_feasibility(rows, rhs) is None
