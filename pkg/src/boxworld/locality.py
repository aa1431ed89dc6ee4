"""Bipartite locality: exact LP membership in the local polytope.

A state is local across a bipartition (A, B) when it is a convex mixture of
pairs of deterministic strategies, one per side; a deterministic strategy
maps the party's full input tuple to an output tuple. For bipartite box
world this local set coincides with the separable states (mixtures of
products of single-party states), which is the identification this module
implements; it is not asserted for other theories.

The membership LP uses one equality per joint table cell plus weight
normalization, solved by the exact rational simplex, so verdicts and
certificates carry no floating-point tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

from .boxes import (JointState, Key, SystemLayout, as_prob, damping_weight,
                    layout)
from .errors import BudgetExceededError, LayoutMismatchError
from .simplex import lp_feasibility

DEFAULT_SIDE_BUDGET = 20_000
DEFAULT_CELL_BUDGET = 2_000_000


@dataclass(frozen=True)
class DeterministicStrategy:
    """A party's deterministic response: full input tuple -> output tuple.

    `responses` is aligned with the party layout's input tuples in
    lexicographic order.
    """

    layout: SystemLayout
    responses: tuple[tuple[int, ...], ...]

    def response(self, inputs: tuple[int, ...]) -> tuple[int, ...]:
        idx = 0
        for x, box in zip(inputs, self.layout.boxes):
            idx = idx * box.num_inputs + x
        return self.responses[idx]


def enumerate_deterministic(party_layout: SystemLayout,
                            budget: int = DEFAULT_SIDE_BUDGET,
                            ) -> list[DeterministicStrategy]:
    """All deterministic strategies for the party, canonical order."""
    count = party_layout.num_output_tuples() ** party_layout.num_input_tuples()
    if count > budget:
        raise BudgetExceededError(
            f"{count} deterministic strategies exceed the budget {budget}")
    outputs = list(party_layout.output_tuples())
    n_inputs = party_layout.num_input_tuples()
    return [DeterministicStrategy(party_layout, combo)
            for combo in product(outputs, repeat=n_inputs)]


@dataclass(frozen=True)
class LocalityResult:
    local: bool
    partition: tuple[tuple[int, ...], tuple[int, ...]]
    weights: Mapping | None = None  # (index_a, index_b) -> Fraction
    strategies_a: tuple = ()
    strategies_b: tuple = ()

    @property
    def status(self) -> str:
        return "LOCAL" if self.local else "NONLOCAL"

    def mixture_table(self, full_layout: SystemLayout) -> dict[Key, Fraction]:
        """Joint table reconstructed from the certificate weights."""
        if not self.local:
            raise ValueError("no certificate for a nonlocal verdict")
        a_idx, b_idx = self.partition
        table: dict[Key, Fraction] = {}
        for (ia, ib), w in self.weights.items():
            da = self.strategies_a[ia]
            db = self.strategies_b[ib]
            for x in full_layout.input_tuples():
                xa = tuple(x[i] for i in a_idx)
                xb = tuple(x[i] for i in b_idx)
                out = _interleave(len(full_layout), a_idx, da.response(xa),
                                  b_idx, db.response(xb))
                key = (x, out)
                table[key] = table.get(key, Fraction(0)) + w
        return {k: v for k, v in table.items() if v != 0}

    def verify(self, state: JointState) -> bool:
        """Exact check that the weights reproduce the state's table."""
        return self.mixture_table(state.layout) == state.table

    def to_json_obj(self) -> dict:
        obj: dict = {"status": self.status,
                     "partition": [list(p) for p in self.partition]}
        if self.local:
            obj["weights"] = [
                {"strategy_a": ia, "strategy_b": ib,
                 "weight": f"{w.numerator}/{w.denominator}"}
                for (ia, ib), w in sorted(self.weights.items())]
            obj["strategies_a"] = [[list(r) for r in s.responses]
                                   for s in self.strategies_a]
            obj["strategies_b"] = [[list(r) for r in s.responses]
                                   for s in self.strategies_b]
        return obj


def _interleave(n: int, a_idx: Sequence[int], a_vals: Sequence[int],
                b_idx: Sequence[int], b_vals: Sequence[int]) -> tuple[int, ...]:
    out = [0] * n
    for i, v in zip(a_idx, a_vals):
        out[i] = v
    for i, v in zip(b_idx, b_vals):
        out[i] = v
    return tuple(out)


def _check_partition(state: JointState, bipartition) -> tuple[tuple, tuple]:
    a_idx = tuple(sorted(set(bipartition[0])))
    b_idx = tuple(sorted(set(bipartition[1])))
    n = len(state.layout)
    if set(a_idx) & set(b_idx):
        raise ValueError("bipartition sides overlap")
    if set(a_idx) | set(b_idx) != set(range(n)):
        raise ValueError("bipartition must cover every box")
    if not a_idx or not b_idx:
        raise ValueError("both sides of the bipartition must be non-empty")
    return a_idx, b_idx


def is_local(state: JointState, bipartition,
             side_budget: int = DEFAULT_SIDE_BUDGET,
             cell_budget: int = DEFAULT_CELL_BUDGET) -> LocalityResult:
    """Exact local-hidden-variable membership across the bipartition.

    Feasibility of {w >= 0, sum w = 1, sum w D_A D_B = p} is decided by the
    exact simplex; a local verdict returns the weights, which reproduce the
    table exactly.
    """
    a_idx, b_idx = _check_partition(state, bipartition)
    lay = state.layout
    lay_a = lay.subset(a_idx)
    lay_b = lay.subset(b_idx)
    strat_a = enumerate_deterministic(lay_a, side_budget)
    strat_b = enumerate_deterministic(lay_b, side_budget)

    cells = [(x, a) for x in lay.input_tuples() for a in lay.output_tuples()]
    n_cols = len(strat_a) * len(strat_b)
    n_rows = len(cells) + 1
    if n_cols * n_rows > cell_budget:
        raise BudgetExceededError(
            f"LP tableau of {n_cols} x {n_rows} exceeds the cell budget "
            f"{cell_budget}")

    cell_index = {cell: r for r, cell in enumerate(cells)}
    zero, one = Fraction(0), Fraction(1)
    rows = [[zero] * n_cols for _ in range(n_rows)]
    col = 0
    for da in strat_a:
        for db in strat_b:
            for x in lay.input_tuples():
                xa = tuple(x[i] for i in a_idx)
                xb = tuple(x[i] for i in b_idx)
                out = _interleave(len(lay), a_idx, da.response(xa),
                                  b_idx, db.response(xb))
                rows[cell_index[(x, out)]][col] = one
            rows[-1][col] = one
            col += 1
    rhs = [state.prob(x, a) for (x, a) in cells] + [one]

    point = lp_feasibility(rows, rhs)
    if point is None:
        return LocalityResult(False, (a_idx, b_idx))
    nb = len(strat_b)
    weights = {}
    for j, w in enumerate(point):
        if w != 0:
            weights[(j // nb, j % nb)] = w
    return LocalityResult(True, (a_idx, b_idx), weights,
                          tuple(strat_a), tuple(strat_b))


def verify_decomposition(state: JointState,
                         terms: Sequence[tuple],
                         partition=None) -> bool:
    """Exact check of sum_i w_i pA_i(a|x) pB_i(b|y) == state table.

    Each term is (weight, stateA, stateB); weights must be non-negative
    rationals summing to 1. By default the A boxes are the first
    len(stateA.layout) boxes of the state; pass `partition` for
    non-contiguous splits.
    """
    if not terms:
        raise ValueError("no terms supplied")
    weights = [as_prob(w) for w, _a, _b in terms]
    if sum(weights) != 1:
        raise ValueError(f"term weights sum to {sum(weights)}, not 1")
    n = len(state.layout)
    if partition is None:
        na = len(terms[0][1].layout)
        a_idx, b_idx = tuple(range(na)), tuple(range(na, n))
    else:
        a_idx, b_idx = _check_partition(state, partition)
    lay_a = state.layout.subset(a_idx)
    lay_b = state.layout.subset(b_idx)
    for _w, sa, sb in terms:
        if sa.layout != lay_a or sb.layout != lay_b:
            raise LayoutMismatchError("term layouts do not match the bipartition")

    mixture: dict[Key, Fraction] = {}
    for w, sa, sb in terms:
        if w == 0:
            continue
        for (xa, aa), pa in sa.table.items():
            wpa = w * pa
            for (xb, ab), pb in sb.table.items():
                key = (_interleave(n, a_idx, xa, b_idx, xb),
                       _interleave(n, a_idx, aa, b_idx, ab))
                mixture[key] = mixture.get(key, Fraction(0)) + wpa * pb
    mixture = {k: v for k, v in mixture.items() if v != 0}
    return mixture == state.table


# ---------------------------------------------------------------------------
# Explicit separable decompositions of the example families


def example_main_decomposition(N: int) -> list[tuple[Fraction, JointState, JointState]]:
    """The two-term product decomposition of `example_main(N)`:
    1/2 q1(a|x) r1(b) + 1/2 q2(a|x) r2(b)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    half = Fraction(1, 2)
    return [(half, _q_state(N, 0, extra=False), _point_bit(0, outputs=2)),
            (half, _q_state(N, 1, extra=False), _point_bit(1, outputs=2))]


def example_damped_decomposition(N: int, k: float,
                                 ) -> list[tuple[Fraction, JointState, JointState]]:
    """Product decomposition of `example_damped(N, k)`: the two main-family
    terms scaled by lam plus the joint extra-symbol point mass."""
    _, lam = damping_weight(N, k)
    terms = []
    if lam != 0:
        terms.append((lam / 2, _q_state(N, 0, extra=True), _point_bit(0, outputs=3)))
        terms.append((lam / 2, _q_state(N, 1, extra=True), _point_bit(1, outputs=3)))
    if lam != 1:
        terms.append((1 - lam, _point_box(2, N + 2, N + 1), _point_bit(2, outputs=3)))
    return terms


def _q_state(N: int, flavor: int, extra: bool) -> JointState:
    """Single-box factor: deterministic 0 on input `flavor`, uniform over
    {1..N} on the other input."""
    outs = N + 2 if extra else N + 1
    lay = layout((2, outs))
    table: dict[Key, Fraction] = {((flavor,), (0,)): Fraction(1)}
    u = Fraction(1, N)
    for a in range(1, N + 1):
        table[((1 - flavor,), (a,))] = u
    return JointState._trusted(lay, table)


def _point_bit(value: int, outputs: int) -> JointState:
    lay = layout((1, outputs))
    return JointState._trusted(lay, {((0,), (value,)): Fraction(1)})


def _point_box(num_inputs: int, num_outputs: int, value: int) -> JointState:
    lay = layout((num_inputs, num_outputs))
    return JointState._trusted(
        lay, {((x,), (value,)): Fraction(1) for x in range(num_inputs)})


# ---------------------------------------------------------------------------
# CHSH diagnostics


def chsh_win_sum(state: JointState) -> Fraction:
    """Sum over input pairs of P(a xor b = x and y); deterministic strategy
    pairs attain at most 3, the PR box attains 4."""
    if len(state.layout) != 2 or any(b.num_inputs < 2 or b.num_outputs < 2
                                     for b in state.layout.boxes):
        raise ValueError("CHSH needs two boxes with >= 2 inputs and outputs")
    total = Fraction(0)
    for ((x, y), (a, b)), p in state.table.items():
        if x <= 1 and y <= 1 and a <= 1 and b <= 1 and a ^ b == x & y:
            total += p
    return total


def pr_noise_threshold(tol: Fraction = Fraction(1, 2 ** 20),
                       side_budget: int = DEFAULT_SIDE_BUDGET,
                       cell_budget: int = DEFAULT_CELL_BUDGET) -> Fraction:
    """Bisect the CHSH win fraction for the noisy PR family down to `tol`.

    The family `noisy_pr_box(win)` is local exactly up to win = 3/4 (the
    deterministic bound of 3 wins out of 4); each probe is an exact LP at a
    dyadic rational, so the bracket is rigorous.
    """
    from .boxes import noisy_pr_box

    lo, hi = Fraction(1, 2), Fraction(1)
    partition = ((0,), (1,))
    while hi - lo > tol:
        mid = (lo + hi) / 2
        verdict = is_local(noisy_pr_box(mid), partition,
                           side_budget=side_budget, cell_budget=cell_budget)
        if verdict.local:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2
