"""Effects and basic (adaptive) measurement strategies.

A basic strategy is a decision tree: measure one box with a chosen input,
branch on its output, repeat until every box has been measured, then emit
an outcome label. These are the only measurements needed on systems with at
most two non-classical boxes, and they are fine-grained (maximally
informative) exactly when the outcome labelling is injective.

Effects are linear functionals represented by coefficient vectors over
(x, a) with entries in [0, 1]; an effect with at most one non-zero entry
admits no non-trivial refinement. Equality of effects and measurement
completeness are decided on the deterministic product states, which span
the affine hull of the no-signalling polytope (requires every box to have
at least two outputs).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Mapping, Sequence

from .boxes import (JointState, Key, SystemLayout, deterministic_state)
from .errors import (BudgetExceededError, LayoutMismatchError,
                     NotAMeasurementError, UnsupportedLayoutError)


class EffectVector:
    """Sparse coefficient table R(a|x) with entries in [0, 1]."""

    __slots__ = ("layout", "entries")

    def __init__(self, layout: SystemLayout, entries: Mapping):
        table: dict[Key, Fraction] = {}
        n = len(layout)
        for key, value in entries.items():
            x, a = tuple(key[0]), tuple(key[1])
            if len(x) != n or len(a) != n:
                raise ValueError(f"effect key {key!r} has wrong arity")
            for i, box in enumerate(layout.boxes):
                if not (0 <= x[i] < box.num_inputs and 0 <= a[i] < box.num_outputs):
                    raise ValueError(f"effect key {key!r} outside the index space")
            r = Fraction(value)
            if r < 0 or r > 1:
                raise ValueError(f"effect entry {r} outside [0, 1]")
            if r != 0:
                table[(x, a)] = r
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "entries", table)

    def __setattr__(self, name, value):
        raise AttributeError("EffectVector is immutable")

    def __eq__(self, other):
        if not isinstance(other, EffectVector):
            return NotImplemented
        return self.layout == other.layout and self.entries == other.entries

    def __repr__(self):
        return f"EffectVector(nonzero={len(self.entries)})"


def effect_apply(effect: EffectVector, state: JointState) -> Fraction:
    """Outcome probability sum(p(a|x) R(a|x)); exact."""
    if effect.layout != state.layout:
        raise LayoutMismatchError("effect and state layouts differ")
    total = Fraction(0)
    for key, r in effect.entries.items():
        p = state.table.get(key)
        if p is not None:
            total += p * r
    return total


def unit_effect(layout: SystemLayout, inputs: Sequence[int] | None = None) -> EffectVector:
    """The unit map restricted to one input column: all-ones over that column."""
    x = tuple(inputs) if inputs is not None else (0,) * len(layout)
    return EffectVector(layout, {(x, a): 1 for a in layout.output_tuples()})


# ---------------------------------------------------------------------------
# Strategy trees


@dataclass(frozen=True)
class Leaf:
    outcome: object


@dataclass(frozen=True)
class MeasureNode:
    box: int
    input: int
    children: tuple  # one subtree per output value of `box`


class BasicStrategy:
    """Adaptive decision tree measuring every box exactly once per path."""

    __slots__ = ("layout", "root")

    def __init__(self, layout: SystemLayout, root):
        self._check(layout, root, frozenset())
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "root", root)

    def __setattr__(self, name, value):
        raise AttributeError("BasicStrategy is immutable")

    @staticmethod
    def _check(layout: SystemLayout, node, measured: frozenset):
        if isinstance(node, Leaf):
            if len(measured) != len(layout):
                raise ValueError("leaf reached before all boxes were measured")
            return
        if not isinstance(node, MeasureNode):
            raise TypeError(f"not a strategy node: {node!r}")
        if not (0 <= node.box < len(layout)):
            raise ValueError(f"box {node.box} out of range")
        if node.box in measured:
            raise ValueError(f"box {node.box} measured twice on one path")
        box = layout[node.box]
        if not (0 <= node.input < box.num_inputs):
            raise ValueError(f"input {node.input} out of range for box {node.box}")
        if len(node.children) != box.num_outputs:
            raise ValueError(f"box {node.box} needs {box.num_outputs} branches")
        for child in node.children:
            BasicStrategy._check(layout, child, measured | {node.box})

    def leaves(self) -> Iterator[tuple[tuple[int, ...], tuple[int, ...], object]]:
        """Yield (inputs x(a), outputs a, outcome) per root-to-leaf path."""
        n = len(self.layout)

        def walk(node, xs: dict, as_: dict):
            if isinstance(node, Leaf):
                yield (tuple(xs[i] for i in range(n)),
                       tuple(as_[i] for i in range(n)), node.outcome)
                return
            for out, child in enumerate(node.children):
                yield from walk(child, {**xs, node.box: node.input},
                                {**as_, node.box: out})

        yield from walk(self.root, {}, {})

    def outcomes(self) -> list:
        seen = []
        for _, _, r in self.leaves():
            if r not in seen:
                seen.append(r)
        return seen

    def injective(self) -> bool:
        labels = [r for _, _, r in self.leaves()]
        return len(labels) == len(set(labels))


class OutcomeDistribution(Mapping):
    """Probabilities per outcome label; sums to 1 exactly."""

    __slots__ = ("probs",)

    def __init__(self, probs: Mapping):
        table = {k: Fraction(v) for k, v in probs.items()}
        if any(p < 0 for p in table.values()):
            raise ValueError("negative outcome probability")
        if sum(table.values(), Fraction(0)) != 1:
            raise ValueError("outcome probabilities must sum to 1")
        object.__setattr__(self, "probs", table)

    def __setattr__(self, name, value):
        raise AttributeError("OutcomeDistribution is immutable")

    def __getitem__(self, key):
        return self.probs[key]

    def __iter__(self):
        return iter(self.probs)

    def __len__(self):
        return len(self.probs)


def evaluate_strategy(state: JointState, strategy: BasicStrategy) -> OutcomeDistribution:
    """Outcome distribution of running the strategy on the state.

    Each leaf contributes p(a|x(a)); the chain rule collapses the adaptive
    path probability to the joint table entry at the path's inputs.
    """
    if strategy.layout != state.layout:
        raise LayoutMismatchError("strategy and state layouts differ")
    dist: dict = {}
    for x, a, r in strategy.leaves():
        p = state.table.get((x, a))
        if p is not None:
            dist[r] = dist.get(r, Fraction(0)) + p
        else:
            dist.setdefault(r, Fraction(0))
    return OutcomeDistribution(dist)


def strategy_effects(strategy: BasicStrategy) -> list[EffectVector]:
    """One 0/1 effect per outcome: R(a|x) = 1 iff the leaf at a carries the
    outcome and x is the path's input list."""
    per_outcome: dict[object, dict] = {}
    order: list = []
    for x, a, r in strategy.leaves():
        if r not in per_outcome:
            per_outcome[r] = {}
            order.append(r)
        per_outcome[r][(x, a)] = 1
    return [EffectVector(strategy.layout, per_outcome[r]) for r in order]


def product_strategy(sx: BasicStrategy, sy: BasicStrategy) -> BasicStrategy:
    """Run sx to completion, then sy; outcomes are (rx, ry) pairs.

    The composite lives on the concatenated layout, sy's boxes shifted past
    sx's. Injectivity of both factors carries over to the product.
    """
    shift = len(sx.layout)

    def shifted(node, rx):
        if isinstance(node, Leaf):
            return Leaf((rx, node.outcome))
        return MeasureNode(node.box + shift, node.input,
                           tuple(shifted(c, rx) for c in node.children))

    def graft(node):
        if isinstance(node, Leaf):
            return shifted(sy.root, node.outcome)
        return MeasureNode(node.box, node.input,
                           tuple(graft(c) for c in node.children))

    return BasicStrategy(sx.layout.concat(sy.layout), graft(sx.root))


def fiducial_strategy(layout: SystemLayout, inputs: Sequence[int],
                      order: Sequence[int] | None = None) -> BasicStrategy:
    """Non-adaptive strategy: fixed input per box, measured in the given
    order (default ascending), labelled by the full output tuple."""
    n = len(layout)
    order = list(order) if order is not None else list(range(n))
    inputs = tuple(inputs)

    def build(pos: int, outputs: dict):
        if pos == n:
            return Leaf(tuple(outputs[i] for i in range(n)))
        i = order[pos]
        return MeasureNode(i, inputs[i], tuple(
            build(pos + 1, {**outputs, i: out})
            for out in range(layout[i].num_outputs)))

    return BasicStrategy(layout, build(0, {}))


# ---------------------------------------------------------------------------
# Enumeration


DEFAULT_STRATEGY_BUDGET = 10 ** 6


def count_strategies(layout: SystemLayout) -> int:
    """Number of distinct strategy trees (canonical outcome labels)."""
    memo: dict[frozenset, int] = {frozenset(): 1}

    def count(remaining: frozenset) -> int:
        if remaining in memo:
            return memo[remaining]
        total = 0
        for i in remaining:
            box = layout[i]
            total += box.num_inputs * count(remaining - {i}) ** box.num_outputs
        memo[remaining] = total
        return total

    return count(frozenset(range(len(layout))))


def enumerate_strategies(layout: SystemLayout,
                         budget: int = DEFAULT_STRATEGY_BUDGET,
                         ) -> Iterator[BasicStrategy]:
    """Every injective basic strategy, outcome labels fixed to the leaf's
    output tuple. Refuses up front if the count exceeds the budget."""
    total = count_strategies(layout)
    if total > budget:
        raise BudgetExceededError(
            f"{total} strategies exceed the enumeration budget {budget}")
    n = len(layout)

    def subtrees(remaining: tuple[int, ...], outputs: dict) -> list:
        if not remaining:
            return [Leaf(tuple(outputs[i] for i in range(n)))]
        trees = []
        for i in remaining:
            rest = tuple(j for j in remaining if j != i)
            box = layout[i]
            branch_options = [subtrees(rest, {**outputs, i: out})
                              for out in range(box.num_outputs)]
            for xv in range(box.num_inputs):
                for combo in product(*branch_options):
                    trees.append(MeasureNode(i, xv, combo))
        return trees

    for root in subtrees(tuple(range(n)), {}):
        yield BasicStrategy(layout, root)


# ---------------------------------------------------------------------------
# Spanning-set tests (deterministic product states span the no-signalling
# affine hull, so agreement there decides agreement on all states)


def _require_multi_output(layout: SystemLayout, op: str):
    if any(b.num_outputs < 2 for b in layout.boxes):
        raise UnsupportedLayoutError(
            f"{op} is undefined for layouts containing single-output boxes")


def _deterministic_responses(layout: SystemLayout) -> Iterator[tuple]:
    per_box = [list(product(range(b.num_outputs), repeat=b.num_inputs))
               for b in layout.boxes]
    return product(*per_box)


def _dot_on_deterministic(effect: EffectVector, responses: tuple) -> Fraction:
    total = Fraction(0)
    for x in effect.layout.input_tuples():
        a = tuple(responses[i][x[i]] for i in range(len(effect.layout)))
        r = effect.entries.get((x, a))
        if r is not None:
            total += r
    return total


def effects_equal(r: EffectVector, s: EffectVector) -> bool:
    """True iff the two vectors represent the same functional on states."""
    if r.layout != s.layout:
        raise LayoutMismatchError("effect layouts differ")
    _require_multi_output(r.layout, "effects_equal")
    if r.entries == s.entries:
        return True
    for responses in _deterministic_responses(r.layout):
        if _dot_on_deterministic(r, responses) != _dot_on_deterministic(s, responses):
            return False
    return True


def is_measurement(effects: Sequence[EffectVector]) -> bool:
    """True iff the effects sum to the unit map on every state."""
    if not effects:
        return False
    lay = effects[0].layout
    for e in effects[1:]:
        if e.layout != lay:
            raise LayoutMismatchError("effects must share a layout")
    _require_multi_output(lay, "is_measurement")
    for responses in _deterministic_responses(lay):
        total = sum((_dot_on_deterministic(e, responses) for e in effects),
                    Fraction(0))
        if total != 1:
            return False
    return True


def is_maximally_informative(effects: Sequence[EffectVector]) -> bool:
    """Fine-grained test: every effect has at most one non-zero entry.

    An effect with a single non-zero entry has that vector as its unique
    non-negative representative, so the test on the supplied [0,1]
    representatives is exact. Zero effects are trivial and allowed.
    """
    if not is_measurement(effects):
        raise NotAMeasurementError("effects do not sum to the unit map")
    return all(len(e.entries) <= 1 for e in effects)


# ---------------------------------------------------------------------------
# Separating states


def separating_state(layout: SystemLayout, pair1: tuple, pair2: tuple) -> JointState:
    """A state with p(a1|x1) = 0 and p(a2|x2) > 0 for distinct (a, x) pairs.

    If a1 != a2 the state outputs a2 deterministically; otherwise the box
    where x1 and x2 differ flips its output depending on whether its input
    matches x1 there. Requires every box to have at least two outputs.
    """
    a1, x1 = tuple(pair1[0]), tuple(pair1[1])
    a2, x2 = tuple(pair2[0]), tuple(pair2[1])
    if (a1, x1) == (a2, x2):
        raise ValueError("pairs must be distinct")
    _require_multi_output(layout, "separating_state")
    n = len(layout)
    for (a, x) in ((a1, x1), (a2, x2)):
        if len(a) != n or len(x) != n:
            raise ValueError("pair arity does not match the layout")
        for i, box in enumerate(layout.boxes):
            if not (0 <= x[i] < box.num_inputs and 0 <= a[i] < box.num_outputs):
                raise ValueError(f"pair entry out of range at box {i}")

    if a1 != a2:
        assignment = [[a2[i]] * layout[i].num_inputs for i in range(n)]
    else:
        diff = next(i for i in range(n) if x1[i] != x2[i])
        flipped = (a1[diff] + 1) % layout[diff].num_outputs
        assignment = []
        for i in range(n):
            if i == diff:
                assignment.append([flipped if xv == x1[i] else a1[i]
                                   for xv in range(layout[i].num_inputs)])
            else:
                assignment.append([a1[i]] * layout[i].num_inputs)

    state = deterministic_state(layout, assignment)
    assert state.prob(x1, a1) == 0 and state.prob(x2, a2) > 0
    return state


# ---------------------------------------------------------------------------
# JSON interface


def strategy_to_json_obj(strategy: BasicStrategy) -> dict:
    def encode(node):
        if isinstance(node, Leaf):
            out = node.outcome
            return {"outcome": list(out) if isinstance(out, tuple) else out}
        return {"box": node.box, "input": node.input,
                "children": {str(i): encode(c) for i, c in enumerate(node.children)}}

    return encode(strategy.root)


def strategy_from_json_obj(layout: SystemLayout, obj: Mapping) -> BasicStrategy:
    def tuplify(v):
        return tuple(tuplify(e) for e in v) if isinstance(v, list) else v

    def decode(node):
        if "outcome" in node:
            return Leaf(tuplify(node["outcome"]))
        children = node["children"]
        return MeasureNode(node["box"], node["input"],
                           tuple(decode(children[str(i)]) for i in range(len(children))))

    return BasicStrategy(layout, decode(obj))


def effect_to_json_obj(effect: EffectVector) -> dict:
    return {
        "layout": [{"inputs": b.num_inputs, "outputs": b.num_outputs}
                   for b in effect.layout.boxes],
        "table": [{"x": list(x), "a": list(a), "r": f"{r.numerator}/{r.denominator}"}
                  for (x, a), r in sorted(effect.entries.items())],
    }


def effect_from_json_obj(obj: Mapping) -> EffectVector:
    from .boxes import BoxSpec

    lay = SystemLayout(tuple(BoxSpec(b["inputs"], b["outputs"]) for b in obj["layout"]))
    entries = {(tuple(e["x"]), tuple(e["a"])): Fraction(e["r"]) for e in obj["table"]}
    return EffectVector(lay, entries)
