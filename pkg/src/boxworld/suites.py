"""Randomized and exhaustive property checks, shared by the pytest suite
and the `property-suite` CLI command. Every check is deterministic given
its seed."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .boxes import (BoxSpec, JointState, SystemLayout, condition,
                    deterministic_state, marginalize, mix, tensor,
                    validate_state)
from .cone import cone_decompose
from .entropy import (first_move_entropies, measurement_entropy,
                      measurement_entropy_bruteforce)
from .errors import UnsupportedLayoutError
from .locality import enumerate_deterministic, is_local
from .measurements import (BasicStrategy, Leaf, MeasureNode,
                           enumerate_strategies, is_maximally_informative,
                           separating_state, strategy_effects, unit_effect)
from .sampling import (random_layout, random_state, rational_distribution,
                       random_cone_member)

TOLERANCE = 1e-9


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    checked: int
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{mark} {self.name}: {self.checked} checks{extra}"


def check_subadditivity(seed: int = 0, count: int = 500) -> PropertyResult:
    """H(XY) <= H(X) + H(Y) on random 2-box states."""
    rng = random.Random(seed)
    for trial in range(count):
        lay = random_layout(rng, min_boxes=2, max_boxes=2)
        state = random_state(lay, rng)
        joint = measurement_entropy(state).bits
        hx = measurement_entropy(marginalize(state, [0])).bits
        hy = measurement_entropy(marginalize(state, [1])).bits
        if joint > hx + hy + TOLERANCE:
            return PropertyResult("subadditivity", False, trial + 1,
                                  f"H(XY)={joint} > {hx}+{hy}")
    return PropertyResult("subadditivity", True, count)


def check_product_additivity(seed: int = 1, count: int = 200) -> PropertyResult:
    """H(s x t) = H(s) + H(t) with at most 2 non-classical boxes in total."""
    rng = random.Random(seed)
    trials = 0
    while trials < count:
        lay_s = random_layout(rng, max_boxes=2)
        lay_t = random_layout(rng, max_boxes=2)
        if lay_s.non_classical_count() + lay_t.non_classical_count() > 2:
            continue
        trials += 1
        s = random_state(lay_s, rng)
        t = random_state(lay_t, rng)
        joint = measurement_entropy(tensor(s, t)).bits
        split = measurement_entropy(s).bits + measurement_entropy(t).bits
        if abs(joint - split) > TOLERANCE:
            return PropertyResult("product-additivity", False, trials,
                                  f"|{joint} - {split}| > {TOLERANCE}")
    return PropertyResult("product-additivity", True, count)


def check_marginal_closure(seed: int = 2, count: int = 100) -> PropertyResult:
    """Marginals, mixtures and conditionals stay valid states and satisfy
    the chain identities (marginal chains, mix linearity, re-mixing)."""
    rng = random.Random(seed)
    for trial in range(count):
        lay = random_layout(rng, min_boxes=2, max_boxes=3)
        s = random_state(lay, rng)
        t = random_state(lay, rng)
        n = len(lay)
        if not validate_state(lay, s.table).ok:
            return PropertyResult("marginal-closure", False, trial + 1,
                                  "random state failed validation")

        # marginal chain: restricting in two steps equals one step
        keep = sorted(rng.sample(range(n), rng.randint(1, n)))
        sub = sorted(rng.sample(keep, rng.randint(1, len(keep))))
        once = marginalize(s, sub)
        twice = marginalize(marginalize(s, keep), [keep.index(i) for i in sub])
        if once != twice:
            return PropertyResult("marginal-closure", False, trial + 1,
                                  "marginal chain mismatch")

        # mixing commutes with marginalization
        w = rational_distribution(rng, 2)
        mixed = mix([s, t], w)
        if marginalize(mixed, keep) != mix([marginalize(s, keep),
                                            marginalize(t, keep)], w):
            return PropertyResult("marginal-closure", False, trial + 1,
                                  "mix linearity mismatch")

        # conditioning then re-mixing recovers the marginal on the rest
        box = rng.randrange(n)
        xv = rng.randrange(lay[box].num_inputs)
        rest = [i for i in range(n) if i != box]
        if rest:
            expected = marginalize(s, rest)
            accum: dict = {}
            for av in range(lay[box].num_outputs):
                q, post = condition(s, box, xv, av)
                if q == 0:
                    continue
                for key, p in post.table.items():
                    accum[key] = accum.get(key, Fraction(0)) + q * p
            accum = {k: v for k, v in accum.items() if v != 0}
            if accum != expected.table:
                return PropertyResult("marginal-closure", False, trial + 1,
                                      "conditioning re-mix mismatch")
    return PropertyResult("marginal-closure", True, count)


def check_dp_vs_bruteforce(seed: int = 3, count: int = 60,
                           strategy_cap: int = 2000) -> PropertyResult:
    """The minimizer agrees with exhaustive search wherever enumeration
    fits the budget."""
    rng = random.Random(seed)
    for trial in range(count):
        lay = random_layout(rng, max_boxes=3, strategy_cap=strategy_cap)
        state = random_state(lay, rng)
        dp = measurement_entropy(state).bits
        bf = measurement_entropy_bruteforce(state, budget=strategy_cap)
        if abs(dp - bf) > TOLERANCE:
            return PropertyResult("dp-vs-bruteforce", False, trial + 1,
                                  f"dp={dp} bf={bf}")
    return PropertyResult("dp-vs-bruteforce", True, count)


def check_grouping_consistency(seed: int = 4, count: int = 100) -> PropertyResult:
    """Every opening move is at least the minimum; some move attains it."""
    rng = random.Random(seed)
    for trial in range(count):
        lay = random_layout(rng, min_boxes=2, max_boxes=3)
        state = random_state(lay, rng)
        h = measurement_entropy(state).bits
        moves = first_move_entropies(state)
        if min(moves.values()) > h + 1e-12 or any(
                v < h - 1e-12 for v in moves.values()):
            return PropertyResult("grouping-consistency", False, trial + 1,
                                  f"moves {moves} vs minimum {h}")
    return PropertyResult("grouping-consistency", True, count)


def check_fine_grained_iff_injective() -> PropertyResult:
    """On 2-box layouts with k <= 2, l = 2: a strategy's effects are
    fine-grained exactly when its labelling is injective (exhaustive,
    including merged-label variants and the trivial unit measurement)."""
    checked = 0
    for ka, kb in product((1, 2), repeat=2):
        lay = SystemLayout((BoxSpec(ka, 2), BoxSpec(kb, 2)))
        if is_maximally_informative([unit_effect(lay)]):
            return PropertyResult("fine-grained-iff-injective", False, checked,
                                  "unit measurement flagged fine-grained")
        for strategy in enumerate_strategies(lay):
            checked += 1
            if not is_maximally_informative(strategy_effects(strategy)):
                return PropertyResult("fine-grained-iff-injective", False,
                                      checked, "injective strategy rejected")
            labels = [r for _, _, r in strategy.leaves()]
            for i in range(len(labels)):
                for j in range(i + 1, len(labels)):
                    merged = _relabel(strategy, {labels[j]: labels[i]})
                    checked += 1
                    if is_maximally_informative(strategy_effects(merged)):
                        return PropertyResult("fine-grained-iff-injective",
                                              False, checked,
                                              "merged labelling accepted")
    return PropertyResult("fine-grained-iff-injective", True, checked)


def _relabel(strategy: BasicStrategy, mapping: dict) -> BasicStrategy:
    def walk(node):
        if isinstance(node, Leaf):
            return Leaf(mapping.get(node.outcome, node.outcome))
        return MeasureNode(node.box, node.input,
                           tuple(walk(c) for c in node.children))

    return BasicStrategy(strategy.layout, walk(strategy.root))


def check_separating_states() -> PropertyResult:
    """Exhaustive postcondition check of the separating construction on
    layouts of <= 2 boxes with k <= 3 and 2 <= l <= 3."""
    checked = 0
    dims = [(k, l) for k in (1, 2, 3) for l in (2, 3)]
    layouts = [SystemLayout((BoxSpec(*d),)) for d in dims]
    layouts += [SystemLayout((BoxSpec(*d1), BoxSpec(*d2)))
                for d1 in dims for d2 in dims]
    for lay in layouts:
        pairs = [(a, x) for x in lay.input_tuples() for a in lay.output_tuples()]
        for p1 in pairs:
            for p2 in pairs:
                if p1 == p2:
                    continue
                state = separating_state(lay, p1, p2)
                checked += 1
                if state.prob(p1[1], p1[0]) != 0 or state.prob(p2[1], p2[0]) <= 0:
                    return PropertyResult("separating-states", False, checked,
                                          f"postcondition failed at {p1}, {p2}")
                if not validate_state(lay, state.table).ok:
                    return PropertyResult("separating-states", False, checked,
                                          "construction not a valid state")
    return PropertyResult("separating-states", True, checked)


def check_locality_soundness(seed: int = 5, count: int = 100) -> PropertyResult:
    """Random mixtures of deterministic strategy pairs come back local and
    the returned weights reproduce the table exactly."""
    rng = random.Random(seed)
    for trial in range(count):
        lay = random_layout(rng, min_boxes=2, max_boxes=2,
                            max_inputs=2, max_outputs=2)
        det_a = enumerate_deterministic(lay.subset([0]))
        det_b = enumerate_deterministic(lay.subset([1]))
        pairs = [(da, db) for da in det_a for db in det_b]
        chosen = rng.sample(pairs, rng.randint(1, min(4, len(pairs))))
        weights = rational_distribution(rng, len(chosen))
        states = [deterministic_state(
            lay, [[da.responses[x][0] for x in range(lay[0].num_inputs)],
                  [db.responses[y][0] for y in range(lay[1].num_inputs)]])
            for da, db in chosen]
        state = mix(states, weights)
        result = is_local(state, ((0,), (1,)))
        if not result.local or not result.verify(state):
            return PropertyResult("locality-soundness", False, trial + 1,
                                  "mixture of deterministic pairs not certified")
    return PropertyResult("locality-soundness", True, count)


def check_cone_decomposition(seed: int = 6, count: int = 1000) -> PropertyResult:
    """Canonical ray decomposition: non-negative coefficients, exact
    reconstruction on random rational cone members."""
    rng = random.Random(seed)
    for trial in range(count):
        v = random_cone_member(rng)
        d = cone_decompose(v)
        if any(c < 0 for c in d.coefficients()) or d.reconstruct() != v:
            return PropertyResult("cone-decomposition", False, trial + 1,
                                  f"failed at {v}")
    return PropertyResult("cone-decomposition", True, count)


DEFAULT_COUNTS = {
    "subadditivity": 500,
    "product-additivity": 200,
    "marginal-closure": 100,
    "dp-vs-bruteforce": 60,
    "grouping-consistency": 100,
    "locality-soundness": 100,
    "cone-decomposition": 1000,
}


def run_property_suite(seed: int = 0, counts: dict | None = None,
                       ) -> list[PropertyResult]:
    c = dict(DEFAULT_COUNTS)
    if counts:
        c.update(counts)
    return [
        check_subadditivity(seed, c["subadditivity"]),
        check_product_additivity(seed + 1, c["product-additivity"]),
        check_marginal_closure(seed + 2, c["marginal-closure"]),
        check_dp_vs_bruteforce(seed + 3, c["dp-vs-bruteforce"]),
        check_grouping_consistency(seed + 4, c["grouping-consistency"]),
        check_fine_grained_iff_injective(),
        check_separating_states(),
        check_locality_soundness(seed + 5, c["locality-soundness"]),
        check_cone_decomposition(seed + 6, c["cone-decomposition"]),
    ]
