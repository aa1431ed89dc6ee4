"""Effects, strategies, enumeration, and the spanning-set decision tests."""

import random
from fractions import Fraction as F

import pytest

from boxworld import (BasicStrategy, BudgetExceededError, EffectVector, Leaf,
                      LayoutMismatchError, MeasureNode, NotAMeasurementError,
                      UnsupportedLayoutError, count_strategies,
                      deterministic_state, effect_apply, effects_equal,
                      enumerate_strategies, evaluate_strategy,
                      example_main, fiducial_strategy,
                      is_maximally_informative, is_measurement, layout,
                      marginalize, pr_box, product_strategy, separating_state,
                      strategy_effects, tensor, unit_effect, validate_state)
from boxworld.measurements import (strategy_from_json_obj,
                                   strategy_to_json_obj)
from boxworld.sampling import random_layout, random_state, random_strategy


def adaptive_main_strategy(n: int) -> BasicStrategy:
    """Measure Y; use its output as X's input; measure X."""
    lay = example_main(n).layout

    def x_branch(xv, b):
        return MeasureNode(0, xv, tuple(Leaf((a, b)) for a in range(n + 1)))

    root = MeasureNode(1, 0, (x_branch(0, 0), x_branch(1, 1)))
    return BasicStrategy(lay, root)


# ---------------------------------------------------------------------------
# effects


def test_effect_apply_zero_and_single_entry():
    s = pr_box()
    zero = EffectVector(s.layout, {})
    assert effect_apply(zero, s) == 0
    single = EffectVector(s.layout, {(((0, 0)), ((0, 0))): 1})
    assert effect_apply(single, s) == F(1, 2)


def test_effect_apply_layout_mismatch():
    with pytest.raises(LayoutMismatchError):
        effect_apply(EffectVector(layout((1, 2)), {}), pr_box())


def test_effect_entries_validated():
    lay = layout((1, 2))
    with pytest.raises(ValueError):
        EffectVector(lay, {((0,), (0,)): F(3, 2)})
    with pytest.raises(ValueError):
        EffectVector(lay, {((0,), (2,)): F(1, 2)})


def test_strategy_effects_sum_to_one_on_states():
    rng = random.Random(7)
    for _ in range(20):
        lay = random_layout(rng, max_boxes=2)
        state = random_state(lay, rng)
        strategy = random_strategy(lay, rng)
        total = sum(effect_apply(e, state) for e in strategy_effects(strategy))
        assert total == 1


def test_strategy_effects_single_box_identity():
    lay = layout((1, 3))
    s = fiducial_strategy(lay, [0])
    effects = strategy_effects(s)
    assert [e.entries for e in effects] == [
        {((0,), (a,)): F(1)} for a in range(3)]


def test_adaptive_effect_support():
    # Outcomes with b=0 only involve the x=0 column.
    s = adaptive_main_strategy(2)
    for effect in strategy_effects(s):
        for ((x, _y), (_a, b)) in effect.entries:
            if b == 0:
                assert x == 0
            else:
                assert x == 1


def test_injective_strategy_effects_have_single_entries():
    for strategy in enumerate_strategies(pr_box().layout):
        assert strategy.injective()
        assert all(len(e.entries) == 1 for e in strategy_effects(strategy))


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_adaptive_strategy_on_main_example():
    for n in (1, 3, 5):
        dist = evaluate_strategy(example_main(n), adaptive_main_strategy(n))
        support = {k: v for k, v in dist.items() if v}
        assert support == {(0, 0): F(1, 2), (0, 1): F(1, 2)}


def test_evaluate_on_deterministic_state_is_point():
    lay = layout((2, 2), (1, 3))
    state = deterministic_state(lay, [[1, 0], [2]])
    dist = evaluate_strategy(state, fiducial_strategy(lay, [0, 0]))
    assert {k: v for k, v in dist.items() if v} == {(1, 2): F(1)}


def test_evaluate_fiducial_is_column():
    state = marginalize(example_main(2), [0])
    for x in (0, 1):
        dist = evaluate_strategy(state, fiducial_strategy(state.layout, [x]))
        got = {k[0]: v for k, v in dist.items() if v}
        assert got == {a: state.prob((x,), (a,)) for a in range(3)
                       if state.prob((x,), (a,))}


def test_effects_and_evaluation_agree():
    rng = random.Random(11)
    for _ in range(100):
        lay = random_layout(rng, max_boxes=3)
        state = random_state(lay, rng)
        strategy = random_strategy(lay, rng)
        dist = evaluate_strategy(state, strategy)
        effects = strategy_effects(strategy)
        outcomes = strategy.outcomes()
        assert len(effects) == len(outcomes)
        for outcome, effect in zip(outcomes, effects):
            assert effect_apply(effect, state) == dist[outcome]


# ---------------------------------------------------------------------------
# fine-grained characterization


def test_injective_strategies_are_maximally_informative():
    for strategy in enumerate_strategies(pr_box().layout):
        assert is_maximally_informative(strategy_effects(strategy))


def test_merged_labels_are_not_maximally_informative():
    lay = pr_box().layout
    strategy = fiducial_strategy(lay, [0, 0])

    def relabel(node):
        if isinstance(node, Leaf):
            return Leaf("merged" if node.outcome in ((0, 0), (1, 1))
                        else node.outcome)
        return MeasureNode(node.box, node.input,
                           tuple(relabel(c) for c in node.children))

    merged = BasicStrategy(lay, relabel(strategy.root))
    assert not merged.injective()
    assert not is_maximally_informative(strategy_effects(merged))


def test_unit_measurement_not_maximally_informative():
    lay = layout((2, 3))
    assert is_measurement([unit_effect(lay)])
    assert not is_maximally_informative([unit_effect(lay)])


def test_not_a_measurement_raises():
    lay = layout((1, 2))
    with pytest.raises(NotAMeasurementError):
        is_maximally_informative([EffectVector(lay, {((0,), (0,)): 1})])


# ---------------------------------------------------------------------------
# products


def test_product_of_fiducials_is_joint_fiducial():
    lay_x, lay_y = layout((2, 2)), layout((1, 2))
    prod = product_strategy(fiducial_strategy(lay_x, [1]),
                            fiducial_strategy(lay_y, [0]))
    state = tensor(marginalize(pr_box(), [0]),
                   marginalize(example_main(2), [1]))
    # wrong shapes would raise; compare against the direct joint fiducial
    direct = fiducial_strategy(state.layout, [1, 0])
    d1 = evaluate_strategy(state, prod)
    d2 = evaluate_strategy(state, direct)
    flat = {(k[0][0], k[1][0]): v for k, v in d1.items()}
    assert flat == {(k[0], k[1]): v for k, v in d2.items()}


def test_product_strategy_factorizes_on_tensor_states():
    rng = random.Random(3)
    for _ in range(20):
        lay_s = random_layout(rng, max_boxes=2)
        lay_t = random_layout(rng, max_boxes=1)
        s, t = random_state(lay_s, rng), random_state(lay_t, rng)
        ms, mt = random_strategy(lay_s, rng), random_strategy(lay_t, rng)
        joint = evaluate_strategy(tensor(s, t), product_strategy(ms, mt))
        ds, dt = evaluate_strategy(s, ms), evaluate_strategy(t, mt)
        for (rs, rt), p in joint.items():
            assert p == ds[rs] * dt[rt]


def test_product_of_injective_is_maximally_informative():
    lay = layout((2, 2))
    sx = fiducial_strategy(lay, [0])
    sy = fiducial_strategy(lay, [1])
    prod = product_strategy(sx, sy)
    assert prod.injective()
    assert is_maximally_informative(strategy_effects(prod))


# ---------------------------------------------------------------------------
# enumeration


def test_enumerate_single_box():
    for k in (1, 2, 3):
        strategies = list(enumerate_strategies(layout((k, 2))))
        assert len(strategies) == k
        assert len({s.root.input for s in strategies}) == k


def test_enumerate_two_boxes_sixteen():
    strategies = list(enumerate_strategies(pr_box().layout))
    assert len(strategies) == 16
    canon = {strategy_to_json_obj(s) is not None and str(strategy_to_json_obj(s))
             for s in strategies}
    assert len(canon) == 16  # all distinct trees


def test_enumerate_classical_box_contributes_one_choice():
    lay = layout((1, 2), (3, 2))
    # count = 1*C(rest)^2 + 3*C(rest)^2 with C single box = its k
    assert count_strategies(lay) == 1 * 3 ** 2 + 3 * 1 ** 2
    assert len(list(enumerate_strategies(lay))) == count_strategies(lay)


def test_enumerate_budget_error():
    lay = layout((3, 3), (3, 3), (3, 3))
    with pytest.raises(BudgetExceededError):
        list(enumerate_strategies(lay, budget=10 ** 6))


def test_count_matches_enumeration():
    rng = random.Random(5)
    for _ in range(10):
        lay = random_layout(rng, max_boxes=3, strategy_cap=600)
        assert count_strategies(lay) == len(list(enumerate_strategies(lay)))


# ---------------------------------------------------------------------------
# separating states and effect equality


def test_separating_state_distinct_outputs():
    lay = layout((2, 3))
    state = separating_state(lay, ((0,), (0,)), ((1,), (0,)))
    assert state.prob((0,), (0,)) == 0
    assert state.prob((0,), (1,)) == 1
    assert state.table == {((x,), (1,)): F(1) for x in range(2)}


def test_separating_state_same_output_branches_on_input():
    lay = layout((2, 2), (1, 2))
    a = (0, 0)
    state = separating_state(lay, (a, (0, 0)), (a, (1, 0)))
    assert state.prob((0, 0), a) == 0
    assert state.prob((1, 0), a) == 1
    assert validate_state(lay, state.table).ok


def test_separating_state_errors():
    lay = layout((2, 2))
    with pytest.raises(ValueError):
        separating_state(lay, ((0,), (0,)), ((0,), (0,)))
    with pytest.raises(UnsupportedLayoutError):
        separating_state(layout((2, 1), (1, 2)), ((0, 0), (0, 0)), ((0, 1), (0, 0)))


def test_effects_equal_entrywise_and_orthogonal_direction():
    lay = layout((2, 2))
    base = EffectVector(lay, {((x,), (a,)): F(1, 2)
                              for x in range(2) for a in range(2)})
    assert effects_equal(base, base)
    # add c * (column-0 indicator - column-1 indicator): invisible to states
    c = F(1, 4)
    shifted = EffectVector(lay, {((x,), (a,)): F(1, 2) + (c if x == 0 else -c)
                                 for x in range(2) for a in range(2)})
    assert shifted.entries != base.entries
    assert effects_equal(base, shifted)


def test_single_entry_representative_is_unique():
    # A one-entry effect equals a nonneg vector only entrywise: random
    # candidates that differ entrywise never agree on all states.
    lay = layout((2, 2), (1, 2))
    target = EffectVector(lay, {((0, 0), (1, 0)): F(2, 3)})
    rng = random.Random(13)
    keys = [(x, a) for x in lay.input_tuples() for a in lay.output_tuples()]
    for _ in range(200):
        entries = {k: F(rng.randrange(0, 4), 3) for k in rng.sample(keys, 3)}
        candidate = EffectVector(lay, entries)
        if effects_equal(target, candidate):
            assert candidate.entries == target.entries
    assert effects_equal(target, EffectVector(lay, dict(target.entries)))


def test_effects_equal_is_an_equivalence_relation():
    rng = random.Random(29)
    lay = layout((2, 2))
    keys = [(x, a) for x in lay.input_tuples() for a in lay.output_tuples()]

    def orthogonal_shift(effect, c):
        entries = {k: effect.entries.get(k, F(0)) + (c if k[0] == (0,) else -c)
                   for k in keys}
        return EffectVector(lay, entries)

    pool = []
    for _ in range(4):
        base = EffectVector(lay, {k: F(rng.randrange(1, 3), 4) for k in keys})
        pool += [base, orthogonal_shift(base, F(1, 8)),
                 orthogonal_shift(base, F(-1, 8))]
    for e in pool:
        assert effects_equal(e, e)
    for a in pool:
        for b in pool:
            assert effects_equal(a, b) == effects_equal(b, a)
            for c in pool:
                if effects_equal(a, b) and effects_equal(b, c):
                    assert effects_equal(a, c)


def test_is_measurement_cases():
    lay = pr_box().layout
    strategy = fiducial_strategy(lay, [0, 1])
    effects = strategy_effects(strategy)
    assert is_measurement(effects)
    assert not is_measurement(effects[1:])
    assert is_measurement([unit_effect(lay, (1, 0))])
    with pytest.raises(UnsupportedLayoutError):
        is_measurement([unit_effect(layout((2, 1)))])


# ---------------------------------------------------------------------------
# construction and serialization


def test_strategy_validation_errors():
    lay = pr_box().layout
    with pytest.raises(ValueError):
        BasicStrategy(lay, Leaf("early"))
    node = MeasureNode(0, 0, (Leaf(0), Leaf(1)))
    with pytest.raises(ValueError):
        BasicStrategy(lay, node)  # box 1 never measured
    dup = MeasureNode(0, 0, (MeasureNode(0, 1, (Leaf(0), Leaf(1))),) * 2)
    with pytest.raises(ValueError):
        BasicStrategy(lay, dup)


def test_strategy_json_round_trip():
    s = adaptive_main_strategy(2)
    obj = strategy_to_json_obj(s)
    back = strategy_from_json_obj(s.layout, obj)
    assert [leaf for leaf in back.leaves()] == [leaf for leaf in s.leaves()]
