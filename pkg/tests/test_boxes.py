"""State model: validation, reduction, composition, constructors, JSON."""

import json
from fractions import Fraction as F

import pytest

from boxworld import (BoxSpec, InvalidStateError, JointState, SystemLayout,
                      TableStructureError, classical_realization, condition,
                      deterministic_state, example_damped, example_main,
                      layout, marginalize, mix, noisy_pr_box, permute_boxes,
                      pr_box, state_from_json_obj, state_to_json_obj, tensor,
                      tensor_all, validate_state)
from boxworld.boxes import damping_weight


def test_box_spec_invariants():
    assert BoxSpec(1, 2).classical
    assert not BoxSpec(2, 2).classical
    with pytest.raises(ValueError):
        BoxSpec(0, 2)
    with pytest.raises(ValueError):
        BoxSpec(2, 0)


def test_layout_counts():
    lay = layout((2, 2), (1, 3), (3, 2))
    assert lay.non_classical_count() == 2
    assert lay.num_input_tuples() == 6
    assert lay.num_output_tuples() == 12
    with pytest.raises(ValueError):
        SystemLayout(())


# ---------------------------------------------------------------------------
# validate_state


def test_validate_pr_box_clean():
    s = pr_box()
    assert validate_state(s.layout, s.table).ok


def test_validate_normalization_violation():
    s = pr_box()
    table = dict(s.table)
    table[((0, 0), (0, 0))] += F(1, 4)
    report = validate_state(s.layout, table)
    norm = [v for v in report.violations if type(v).__name__ == "NormalizationViolation"]
    assert norm and norm[0].inputs == (0, 0) and norm[0].total == F(5, 4)


def test_validate_no_signalling_violation_names_box():
    # A's marginal depends on y while B's marginal is uniform for every x:
    # sum over b depends on y, so the violation is attributed to box B only.
    lay = pr_box().layout
    table = {}
    for x in range(2):
        for y in range(2):
            pa = (F(3, 4), F(1, 4)) if y == 1 else (F(1, 2), F(1, 2))
            for a in range(2):
                for b in range(2):
                    table[((x, y), (a, b))] = pa[a] / 2
    report = validate_state(lay, table)
    ns = [v for v in report.violations if type(v).__name__ == "NoSignallingViolation"]
    assert ns and all(v.box == 1 for v in ns)
    assert not [v for v in report.violations
                if type(v).__name__ == "NormalizationViolation"]


def test_validate_structural_error_is_not_a_violation():
    s = pr_box()
    table = dict(s.table)
    table[((0, 2), (0, 0))] = F(1, 2)  # input 2 out of range
    with pytest.raises(TableStructureError):
        validate_state(s.layout, table)
    with pytest.raises(TableStructureError):
        validate_state(s.layout, {((0,), (0,)): F(1)})  # wrong arity


def test_invalid_state_rejected_at_construction():
    lay = layout((1, 2))
    with pytest.raises(InvalidStateError):
        JointState(lay, {((0,), (0,)): F(1, 3)})


# ---------------------------------------------------------------------------
# marginalize / condition


def test_marginalize_pr_uniform():
    for i in (0, 1):
        m = marginalize(pr_box(), [i])
        assert m.table == {((x,), (a,)): F(1, 2) for x in range(2) for a in range(2)}


def test_marginalize_main_example_y():
    m = marginalize(example_main(5), [1])
    assert m.table == {((0,), (0,)): F(1, 2), ((0,), (1,)): F(1, 2)}


def test_marginalize_tensor_recovers_factor():
    s = example_main(2)
    t = pr_box()
    st = tensor(s, t)
    assert marginalize(st, [0, 1]) == s
    assert marginalize(st, [2, 3]) == t


def test_marginalize_chain():
    s = tensor(example_main(2), deterministic_state(layout((2, 2)), [[1, 0]]))
    once = marginalize(s, [0])
    twice = marginalize(marginalize(s, [0, 2]), [0])
    assert once == twice


def test_marginalize_empty_errors():
    with pytest.raises(ValueError):
        marginalize(pr_box(), [])


def test_condition_pr_box():
    q, rest = condition(pr_box(), 0, 0, 0)
    assert q == F(1, 2)
    assert rest.table == {((y,), (0,)): F(1) for y in range(2)}


def test_condition_product_state_factorizes():
    s = example_main(3)
    t = marginalize(pr_box(), [0])
    st = tensor(s, t)
    q, rest = condition(st, 2, 1, 0)
    assert q == F(1, 2)
    assert rest == s


def test_condition_main_example_on_y():
    n = 4
    q, rest = condition(example_main(n), 1, 0, 0)
    assert q == F(1, 2)
    # supported on a=0 for x=0 and a>=1 for x=1
    assert rest.table[((0,), (0,))] == F(1)
    for a in range(1, n + 1):
        assert rest.table[((1,), (a,))] == F(1, n)
    assert ((1,), (0,)) not in rest.table


def test_condition_zero_probability():
    s = deterministic_state(layout((1, 2), (1, 2)), [[0], [0]])
    q, rest = condition(s, 0, 0, 1)
    assert q == 0 and rest is None


def test_condition_remix_recovers_marginal():
    s = example_main(3)
    expected = marginalize(s, [1])
    acc = {}
    for a in range(4):
        q, rest = condition(s, 0, 1, a)
        if q == 0:
            continue
        for key, p in rest.table.items():
            acc[key] = acc.get(key, F(0)) + q * p
    assert {k: v for k, v in acc.items() if v} == expected.table


# ---------------------------------------------------------------------------
# tensor / mix / permute


def test_tensor_deterministic_bits():
    bit0 = deterministic_state(layout((1, 2)), [[0]])
    bit1 = deterministic_state(layout((1, 2)), [[1]])
    both = tensor(bit0, bit1)
    assert both.table == {((0, 0), (0, 1)): F(1)}


def test_tensor_associative_up_to_relabelling():
    a, b, c = example_main(2), marginalize(pr_box(), [0]), pr_box()
    left = tensor(tensor(a, b), c)
    right = tensor(a, tensor(b, c))
    assert left == right  # same box order either way
    swapped = permute_boxes(left, (2, 0, 1, 3, 4))
    assert marginalize(swapped, [1, 2]) == a


def test_mix_identity_and_uniform():
    s = example_main(2)
    assert mix([s], [1]) == s
    bit0 = deterministic_state(layout((1, 2)), [[0]])
    bit1 = deterministic_state(layout((1, 2)), [[1]])
    u = mix([bit0, bit1], [F(1, 2), F(1, 2)])
    assert u.table == {((0,), (0,)): F(1, 2), ((0,), (1,)): F(1, 2)}


def test_mix_weight_errors():
    from boxworld import LayoutMismatchError

    s = pr_box()
    with pytest.raises(ValueError):
        mix([s, s], [F(1, 2), F(1, 3)])
    with pytest.raises(LayoutMismatchError):
        mix([s, marginalize(s, [0])], [F(1, 2), F(1, 2)])


def test_mix_reconstructs_main_example():
    # 1/2 q1 x r1 + 1/2 q2 x r2 equals the skewed pair, exactly.
    from boxworld import example_main_decomposition

    for n in (1, 2, 5):
        terms = example_main_decomposition(n)
        mixed = mix([tensor(qa, rb) for _w, qa, rb in terms],
                    [w for w, _a, _b in terms])
        assert mixed == example_main(n)


# ---------------------------------------------------------------------------
# constructors


def test_pr_box_entries():
    s = pr_box()
    assert s.prob((1, 1), (0, 0)) == 0
    assert s.prob((0, 0), (1, 1)) == F(1, 2)


def test_noisy_pr_box_interpolates():
    assert noisy_pr_box(1) == pr_box()
    u = noisy_pr_box(F(1, 2))
    assert all(p == F(1, 4) for p in u.table.values()) and len(u.table) == 16


@pytest.mark.parametrize("n", [1, 2, 4])
def test_example_main_entries(n):
    s = example_main(n)
    assert s.layout[0] == BoxSpec(2, n + 1)
    assert s.layout[1] == BoxSpec(1, 2)
    assert s.prob((0, 0), (0, 0)) == F(1, 2)
    if n >= 2:
        assert s.prob((0, 0), (2, 1)) == F(1, 2 * n)
    assert s.prob((1, 0), (0, 1)) == F(1, 2)


def test_example_main_x_marginal_n1():
    m = marginalize(example_main(1), [0])
    assert m.table == {((x,), (a,)): F(1, 2) for x in range(2) for a in range(2)}


def test_example_main_valid_for_all_small_n():
    for n in range(1, 65):
        s = example_main(n)
        assert validate_state(s.layout, s.table).ok


def test_damping_weight_rounding():
    target, lam = damping_weight(2 ** 16, 1.0)
    assert lam == F(1, 8) and target == 0.125
    with pytest.raises(ValueError):
        damping_weight(4, 2.0)  # 2k/log2(N) = 2 > 1
    with pytest.raises(ValueError):
        damping_weight(2, 1.0)


def test_example_damped_entries():
    s = example_damped(2 ** 16, 1.0)
    assert s.layout[0] == BoxSpec(2, 2 ** 16 + 2)
    assert s.layout[1] == BoxSpec(1, 3)
    assert s.prob((0, 0), (2 ** 16 + 1, 2)) == F(7, 8)
    assert s.prob((0, 0), (0, 0)) == F(1, 16)
    assert s.prob((1, 0), (1, 0)) == F(1, 8) / (2 * 2 ** 16)


def test_example_damped_validates():
    s = example_damped(256, 1.0)
    assert validate_state(s.layout, s.table).ok


def test_classical_realization_entries():
    n = 4
    s = classical_realization(n)
    assert s.prob((0, 0, 0), (0, 3, 0)) == F(1, 2 * n)
    assert s.prob((0, 0, 0), (0, 0, 0)) == 0
    m = marginalize(s, [2])
    assert m.table == {((0,), (0,)): F(1, 2), ((0,), (1,)): F(1, 2)}


def test_deterministic_state_cases():
    bit = deterministic_state(layout((1, 2)), [[0]])
    assert bit.table == {((0,), (0,)): F(1)}
    echo = deterministic_state(layout((2, 2)), [[0, 1]])
    assert echo.table == {((0,), (0,)): F(1), ((1,), (1,)): F(1)}
    two = deterministic_state(layout((2, 2), (2, 3)), [[0, 1], [2, 0]])
    assert validate_state(two.layout, two.table).ok


def test_constructors_all_validate():
    for s in (pr_box(), noisy_pr_box(F(5, 8)), example_main(3),
              example_damped(16, 1.0), classical_realization(3)):
        assert validate_state(s.layout, s.table).ok


# ---------------------------------------------------------------------------
# immutability and serialization


def test_states_immutable():
    s = pr_box()
    with pytest.raises(AttributeError):
        s.table = {}


def test_json_round_trip_bit_exact():
    for s in (pr_box(), example_main(3), example_damped(16, 0.5),
              classical_realization(2)):
        obj = state_to_json_obj(s)
        text = json.dumps(obj)
        back = state_from_json_obj(json.loads(text))
        assert back == s


def test_json_omits_zeros_and_sorts():
    obj = state_to_json_obj(example_main(2))
    keys = [(tuple(e["x"]), tuple(e["a"])) for e in obj["table"]]
    assert keys == sorted(keys)
    assert all(F(e["p"]) != 0 for e in obj["table"])
