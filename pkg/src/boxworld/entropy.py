"""Measurement entropy: Shannon utilities, the adaptive-strategy minimizer,
a brute-force oracle, and entropy vectors.

The minimizer computes min over injective basic strategies of the outcome
Shannon entropy via the grouping identity: pick a first (box, input), pay
the entropy of that box's marginal, then recurse on the conditioned
remainder weighted by outcome probabilities. Conditioned states are exact
rational tables, so memoization keys are sound; on systems with at most two
non-classical boxes basic strategies exhaust all fine-grained measurements
and the minimum is the measurement entropy itself (`exact=True`); beyond
that it is an upper bound (`exact=False`).

Only entropy values are floating point; comparisons elsewhere use absolute
tolerance 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .boxes import JointState, SystemLayout, marginalize
from .errors import LayoutMismatchError
from .measurements import (DEFAULT_STRATEGY_BUDGET, BasicStrategy, Leaf,
                           MeasureNode, enumerate_strategies,
                           evaluate_strategy)


def shannon(dist) -> float:
    """Shannon entropy in bits; 0 log 0 = 0. Accepts a mapping (values are
    probabilities) or an iterable of probabilities."""
    probs = dist.values() if isinstance(dist, Mapping) else dist
    h = 0.0
    for p in probs:
        pf = float(p)
        if pf > 0.0:
            h -= pf * math.log2(pf)
    return h


def binary_entropy(q) -> float:
    """h(q) = -q log2 q - (1-q) log2 (1-q)."""
    qf = float(q)
    if not 0.0 <= qf <= 1.0:
        raise ValueError(f"binary_entropy argument {qf} outside [0, 1]")
    if qf == 0.0 or qf == 1.0:
        return 0.0
    return -qf * math.log2(qf) - (1.0 - qf) * math.log2(1.0 - qf)


@dataclass(frozen=True)
class EntropyValue:
    """Entropy in bits; `exact` marks the regime where the basic-strategy
    minimum provably equals the measurement entropy."""

    bits: float
    exact: bool

    def __float__(self):
        return self.bits


# ---------------------------------------------------------------------------
# Minimizer internals. States are (boxes, table) pairs where boxes is a
# tuple of (num_inputs, num_outputs) and table maps (x, a) to a positive
# Fraction, zeros omitted.


def _single_box_min(box: tuple[int, int], table: dict, scale: Fraction) -> float:
    """Min over inputs of the column entropy, of a table whose columns each
    sum to `scale` (the not-yet-normalized conditioned state)."""
    sf = float(scale)
    cols = [0.0] * box[0]
    for (x, _a), p in table.items():
        pf = float(p) / sf
        cols[x[0]] -= pf * math.log2(pf)
    return min(cols)


def _canon(table: dict) -> tuple:
    return tuple(sorted(table.items()))


class _Minimizer:
    def __init__(self):
        self.memo: dict = {}

    def value(self, boxes: tuple, table: dict) -> float:
        n = len(boxes)
        if n == 0:
            return 0.0
        if n == 1:
            return _single_box_min(boxes[0], table, Fraction(1))
        key = (boxes, _canon(table))
        cached = self.memo.get(key)
        if cached is None:
            cached = min(self.move_values(boxes, table).values())
            self.memo[key] = cached
        return cached

    def move_values(self, boxes: tuple, table: dict) -> dict[tuple[int, int], float]:
        """Outcome entropy of the best strategy starting with each
        (box, input) first move."""
        n = len(boxes)
        values: dict[tuple[int, int], float] = {}
        for i in range(n):
            k_i, _l_i = boxes[i]
            rest = boxes[:i] + boxes[i + 1:]
            for xv in range(k_i):
                groups: dict[int, dict] = {}
                marg: dict[int, Fraction] = {}
                for (x, a), p in table.items():
                    if x[i] != xv:
                        continue
                    av = a[i]
                    g = groups.get(av)
                    if g is None:
                        g = groups[av] = {}
                    g[(x[:i] + x[i + 1:], a[:i] + a[i + 1:])] = p
                    for j in range(n):
                        if j != i and x[j] != 0:
                            break
                    else:
                        marg[av] = marg.get(av, Fraction(0)) + p
                total = shannon(marg)
                for av, q in marg.items():
                    if q == 0:
                        continue
                    g = groups[av]
                    if len(rest) == 1:
                        total += float(q) * _single_box_min(rest[0], g, q)
                    elif rest:
                        sub = {k2: p / q for k2, p in g.items()}
                        total += float(q) * self.value(rest, sub)
                values[(i, xv)] = total
        return values


def _as_dp_state(state: JointState) -> tuple[tuple, dict]:
    boxes = tuple((b.num_inputs, b.num_outputs) for b in state.layout.boxes)
    return boxes, state.table


def measurement_entropy(state: JointState) -> EntropyValue:
    """Minimum outcome entropy over injective basic strategies."""
    boxes, table = _as_dp_state(state)
    bits = _Minimizer().value(boxes, table)
    return EntropyValue(bits, state.layout.non_classical_count() <= 2)


def first_move_entropies(state: JointState) -> dict[tuple[int, int], float]:
    """Best achievable outcome entropy per opening (box, input) move.

    Their minimum equals `measurement_entropy`; the spread shows how much
    adaptivity matters for the state.
    """
    boxes, table = _as_dp_state(state)
    return _Minimizer().move_values(boxes, table)


def optimal_strategy(state: JointState) -> tuple[BasicStrategy, EntropyValue]:
    """An explicit strategy tree achieving the minimum, with its value."""
    solver = _Minimizer()
    layout = state.layout
    n = len(layout)

    def build(indices: tuple[int, ...], boxes: tuple, table: dict,
              outputs: dict) -> object:
        if not indices:
            return Leaf(tuple(outputs[i] for i in range(n)))
        if len(indices) == 1:
            k, l = boxes[0]
            cols = [0.0] * k
            for (x, _a), p in table.items():
                pf = float(p)
                cols[x[0]] -= pf * math.log2(pf)
            xv = min(range(k), key=lambda x: cols[x])
            return MeasureNode(indices[0], xv, tuple(
                Leaf(tuple({**outputs, indices[0]: out}[i] for i in range(n)))
                for out in range(l)))
        moves = solver.move_values(boxes, table)
        (pos, xv) = min(moves, key=lambda m: (moves[m], m))
        i = indices[pos]
        rest_idx = indices[:pos] + indices[pos + 1:]
        rest = boxes[:pos] + boxes[pos + 1:]
        children = []
        for out in range(boxes[pos][1]):
            sub: dict = {}
            q = Fraction(0)
            for (x, a), p in table.items():
                if x[pos] != xv or a[pos] != out:
                    continue
                sub[(x[:pos] + x[pos + 1:], a[:pos] + a[pos + 1:])] = p
                if all(x[j] == 0 for j in range(len(boxes)) if j != pos):
                    q += p
            new_out = {**outputs, i: out}
            if q == 0:
                children.append(_any_completion(rest_idx, rest, new_out, n))
            else:
                sub = {k2: p / q for k2, p in sub.items()}
                children.append(build(rest_idx, rest, sub, new_out))
        return MeasureNode(i, xv, tuple(children))

    boxes, table = _as_dp_state(state)
    root = build(tuple(range(n)), boxes, table, {})
    strategy = BasicStrategy(layout, root)
    value = solver.value(boxes, table)
    return strategy, EntropyValue(value, layout.non_classical_count() <= 2)


def _any_completion(indices: tuple, boxes: tuple, outputs: dict, n: int):
    """Fill an unreachable branch with input-0 measurements."""
    if not indices:
        return Leaf(tuple(outputs[i] for i in range(n)))
    return MeasureNode(indices[0], 0, tuple(
        _any_completion(indices[1:], boxes[1:], {**outputs, indices[0]: out}, n)
        for out in range(boxes[0][1])))


def measurement_entropy_bruteforce(state: JointState,
                                   budget: int = DEFAULT_STRATEGY_BUDGET) -> float:
    """Exhaustive minimum over the enumerated strategy stream."""
    best = math.inf
    for strategy in enumerate_strategies(state.layout, budget=budget):
        h = shannon(evaluate_strategy(state, strategy))
        if h < best:
            best = h
    return best


# ---------------------------------------------------------------------------
# Entropy vectors


class EntropyVector:
    """Entropies of every non-empty union of parties, in bits."""

    __slots__ = ("parties", "entries")

    def __init__(self, parties: tuple[tuple[int, ...], ...],
                 entries: dict[frozenset, EntropyValue]):
        object.__setattr__(self, "parties", parties)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("EntropyVector is immutable")

    def bits(self, subset: Iterable[int]) -> float:
        return self.entries[frozenset(subset)].bits

    def value(self, subset: Iterable[int]) -> EntropyValue:
        return self.entries[frozenset(subset)]

    def bipartite(self) -> tuple[float, float, float]:
        """(H(A), H(B), H(AB)) for two parties."""
        if len(self.parties) != 2:
            raise ValueError("bipartite() needs exactly two parties")
        return (self.bits({0}), self.bits({1}), self.bits({0, 1}))

    def to_json_obj(self) -> list[dict]:
        out = []
        for subset in sorted(self.entries, key=lambda s: (len(s), sorted(s))):
            v = self.entries[subset]
            out.append({"subset": sorted(subset), "bits": v.bits, "exact": v.exact})
        return out

    def __repr__(self):
        parts = ", ".join(f"{sorted(s)}: {v.bits:.6f}"
                          for s, v in sorted(self.entries.items(),
                                             key=lambda kv: (len(kv[0]), sorted(kv[0]))))
        return f"EntropyVector({parts})"


def entropy_vector(state: JointState, parties: Sequence[Iterable[int]]) -> EntropyVector:
    """Measurement entropy of the marginal on every non-empty union of the
    given disjoint parties."""
    party_boxes = [tuple(sorted(set(p))) for p in parties]
    seen: set[int] = set()
    for p in party_boxes:
        if not p:
            raise ValueError("parties must be non-empty")
        if seen & set(p):
            raise ValueError("parties must be disjoint")
        seen |= set(p)
    if any(i < 0 or i >= len(state.layout) for i in seen):
        raise ValueError("party box index out of range")

    entries: dict[frozenset, EntropyValue] = {}
    m = len(party_boxes)
    for mask in range(1, 2 ** m):
        subset = frozenset(i for i in range(m) if mask >> i & 1)
        boxes: list[int] = []
        for i in subset:
            boxes.extend(party_boxes[i])
        entries[subset] = measurement_entropy(marginalize(state, boxes))
    return EntropyVector(tuple(party_boxes), entries)
