"""State model for box-world systems.

A system is an ordered list of boxes; box i accepts an input x_i in
{0..k_i-1} and returns an output a_i in {0..l_i-1}. A state is the table of
conditional probabilities p(a|x) over full input/output tuples, constrained
by normalization (each input column sums to 1) and no-signalling (the
marginal on any subset of boxes is independent of the other boxes' inputs).

All probabilities are exact rationals (`fractions.Fraction`). Tables omit
zero entries; the layout defines the full index space. States are immutable
and every operation is a pure function, so everything here is safe to call
concurrently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import InvalidStateError, TableStructureError, LayoutMismatchError

Prob = Fraction

Key = tuple[tuple[int, ...], tuple[int, ...]]  # (inputs x, outputs a)


def as_prob(value) -> Fraction:
    """Coerce to an exact probability; rejects values outside [0, 1]."""
    p = Fraction(value)
    if p < 0 or p > 1:
        raise ValueError(f"probability {p} outside [0, 1]")
    return p


@dataclass(frozen=True)
class BoxSpec:
    """One box: `num_inputs` fiducial measurements with `num_outputs` outcomes."""

    num_inputs: int
    num_outputs: int

    def __post_init__(self):
        if self.num_inputs < 1 or self.num_outputs < 1:
            raise ValueError("boxes need at least one input and one output")

    @property
    def classical(self) -> bool:
        """A box with a single input is an ordinary random variable."""
        return self.num_inputs == 1


@dataclass(frozen=True)
class SystemLayout:
    """Ordered collection of boxes making up a composite system."""

    boxes: tuple[BoxSpec, ...]

    def __post_init__(self):
        boxes = tuple(self.boxes)
        if not boxes:
            raise ValueError("a layout needs at least one box")
        object.__setattr__(self, "boxes", boxes)

    def __len__(self) -> int:
        return len(self.boxes)

    def __getitem__(self, i: int) -> BoxSpec:
        return self.boxes[i]

    def non_classical_count(self) -> int:
        return sum(1 for b in self.boxes if not b.classical)

    def input_tuples(self) -> Iterator[tuple[int, ...]]:
        return product(*(range(b.num_inputs) for b in self.boxes))

    def output_tuples(self) -> Iterator[tuple[int, ...]]:
        return product(*(range(b.num_outputs) for b in self.boxes))

    def num_input_tuples(self) -> int:
        n = 1
        for b in self.boxes:
            n *= b.num_inputs
        return n

    def num_output_tuples(self) -> int:
        n = 1
        for b in self.boxes:
            n *= b.num_outputs
        return n

    def subset(self, indices: Sequence[int]) -> "SystemLayout":
        return SystemLayout(tuple(self.boxes[i] for i in indices))

    def concat(self, other: "SystemLayout") -> "SystemLayout":
        return SystemLayout(self.boxes + other.boxes)


def layout(*dims: tuple[int, int]) -> SystemLayout:
    """Shorthand: layout((k1, l1), (k2, l2), ...)."""
    return SystemLayout(tuple(BoxSpec(k, l) for k, l in dims))


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class RangeViolation:
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    value: Fraction

    def __str__(self):
        return f"p({self.outputs}|{self.inputs}) = {self.value} outside [0, 1]"


@dataclass(frozen=True)
class NormalizationViolation:
    inputs: tuple[int, ...]
    total: Fraction

    def __str__(self):
        return f"column x={self.inputs} sums to {self.total}, not 1"


@dataclass(frozen=True)
class NoSignallingViolation:
    box: int
    input_a: int
    input_b: int
    other_inputs: tuple[int, ...]
    # output tuples of the other boxes where the two marginal sums differ
    mismatches: tuple[tuple[tuple[int, ...], Fraction, Fraction], ...]

    def __str__(self):
        first = self.mismatches[0]
        return (
            f"box {self.box}: marginal over its outputs differs between "
            f"inputs {self.input_a} and {self.input_b} (other inputs "
            f"{self.other_inputs}); e.g. at other outputs {first[0]}: "
            f"{first[1]} vs {first[2]}"
        )


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(str(v) for v in self.violations)


def _check_structure(layout: SystemLayout, table: Mapping) -> dict[Key, Fraction]:
    n = len(layout)
    clean: dict[Key, Fraction] = {}
    for key, value in table.items():
        try:
            x, a = key
            x = tuple(x)
            a = tuple(a)
        except (TypeError, ValueError):
            raise TableStructureError(f"bad table key {key!r}")
        if len(x) != n or len(a) != n:
            raise TableStructureError(f"key {key!r} has wrong arity for {n} boxes")
        for i, box in enumerate(layout.boxes):
            if not (isinstance(x[i], int) and 0 <= x[i] < box.num_inputs):
                raise TableStructureError(f"input {x} out of range for box {i}")
            if not (isinstance(a[i], int) and 0 <= a[i] < box.num_outputs):
                raise TableStructureError(f"output {a} out of range for box {i}")
        try:
            p = Fraction(value)
        except (TypeError, ValueError):
            raise TableStructureError(f"entry {key!r} has non-rational value {value!r}")
        if p != 0:
            clean[(x, a)] = p
    return clean


def validate_state(layout: SystemLayout, table: Mapping) -> ValidationReport:
    """Check a raw table against the state constraints.

    Structural problems (keys outside the layout's index space) raise
    `TableStructureError`; constraint violations are collected in the
    returned report. An empty report means `JointState` construction will
    succeed.
    """
    clean = _check_structure(layout, table)
    violations: list = []

    for (x, a), p in clean.items():
        if p < 0 or p > 1:
            violations.append(RangeViolation(x, a, p))

    # Normalization: every input column sums to exactly 1.
    col_sums: dict[tuple[int, ...], Fraction] = {}
    for (x, _a), p in clean.items():
        col_sums[x] = col_sums.get(x, Fraction(0)) + p
    for x in layout.input_tuples():
        total = col_sums.get(x, Fraction(0))
        if total != 1:
            violations.append(NormalizationViolation(x, total))

    # No-signalling: for each box, the marginal over its outputs must not
    # depend on its input, for every fixed assignment to the other boxes.
    n = len(layout)
    for i, box in enumerate(layout.boxes):
        if box.num_inputs == 1:
            continue
        # marg[(x_i, x_rest)][a_rest] = sum over a_i
        marg: dict[tuple[int, tuple[int, ...]], dict[tuple[int, ...], Fraction]] = {}
        for (x, a), p in clean.items():
            x_rest = x[:i] + x[i + 1:]
            a_rest = a[:i] + a[i + 1:]
            d = marg.setdefault((x[i], x_rest), {})
            d[a_rest] = d.get(a_rest, Fraction(0)) + p
        rest_inputs = product(*(range(layout.boxes[j].num_inputs)
                                for j in range(n) if j != i))
        for x_rest in rest_inputs:
            for xa in range(box.num_inputs):
                for xb in range(xa + 1, box.num_inputs):
                    da = marg.get((xa, x_rest), {})
                    db = marg.get((xb, x_rest), {})
                    mismatches = []
                    for a_rest in set(da) | set(db):
                        va = da.get(a_rest, Fraction(0))
                        vb = db.get(a_rest, Fraction(0))
                        if va != vb:
                            mismatches.append((a_rest, va, vb))
                    if mismatches:
                        mismatches.sort()
                        violations.append(NoSignallingViolation(
                            i, xa, xb, x_rest, tuple(mismatches)))

    return ValidationReport(tuple(violations))


# ---------------------------------------------------------------------------
# States


class JointState:
    """Immutable no-signalling state: exact table p(a|x) over a layout.

    Zero entries are omitted from `table`. Construction validates the
    constraints; operations that preserve them by construction use the
    private fast path.
    """

    __slots__ = ("layout", "table")

    def __init__(self, layout: SystemLayout, table: Mapping):
        report = validate_state(layout, table)
        if not report.ok:
            raise InvalidStateError(report)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "table", _check_structure(layout, table))

    @classmethod
    def _trusted(cls, layout: SystemLayout, table: dict[Key, Fraction]) -> "JointState":
        # Caller guarantees the invariants; zero entries must already be absent.
        self = object.__new__(cls)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "table", table)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("JointState is immutable")

    def prob(self, x: Sequence[int], a: Sequence[int]) -> Fraction:
        return self.table.get((tuple(x), tuple(a)), Fraction(0))

    def support(self) -> Iterator[tuple[Key, Fraction]]:
        return iter(self.table.items())

    def items_sorted(self) -> list[tuple[Key, Fraction]]:
        """Entries in lexicographic (x, a) order, for stable serialization."""
        return sorted(self.table.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, JointState):
            return NotImplemented
        return self.layout == other.layout and self.table == other.table

    def __hash__(self):
        return hash((self.layout, tuple(self.items_sorted())))

    def __repr__(self):
        dims = ",".join(f"({b.num_inputs},{b.num_outputs})" for b in self.layout.boxes)
        return f"JointState(boxes=[{dims}], nonzero={len(self.table)})"


# ---------------------------------------------------------------------------
# Operations


def marginalize(state: JointState, keep: Iterable[int]) -> JointState:
    """Reduced state on the given boxes (ascending index order).

    No-signalling guarantees the result does not depend on the dropped
    boxes' inputs; the dropped inputs are pinned to 0 and outputs summed.
    """
    keep = sorted(set(keep))
    n = len(state.layout)
    if not keep:
        raise ValueError("cannot marginalize onto an empty set of boxes")
    if any(i < 0 or i >= n for i in keep):
        raise ValueError(f"box indices {keep} out of range")
    if keep == list(range(n)):
        return state
    drop = [i for i in range(n) if i not in keep]
    table: dict[Key, Fraction] = {}
    for (x, a), p in state.table.items():
        if any(x[i] != 0 for i in drop):
            continue
        key = (tuple(x[i] for i in keep), tuple(a[i] for i in keep))
        table[key] = table.get(key, Fraction(0)) + p
    return JointState._trusted(state.layout.subset(keep), table)


def condition(state: JointState, box: int, input_value: int, output_value: int,
              ) -> tuple[Fraction, JointState | None]:
    """Measure one box and observe an outcome.

    Returns (probability of the outcome, posterior state of the remaining
    boxes). A zero-probability outcome returns (0, None). Conditioning a
    single-box state returns (probability, None).
    """
    n = len(state.layout)
    spec = state.layout[box]
    if not (0 <= input_value < spec.num_inputs):
        raise ValueError(f"input {input_value} out of range for box {box}")
    if not (0 <= output_value < spec.num_outputs):
        raise ValueError(f"output {output_value} out of range for box {box}")

    rest = [i for i in range(n) if i != box]
    q = Fraction(0)
    sub: dict[Key, Fraction] = {}
    for (x, a), p in state.table.items():
        if x[box] != input_value or a[box] != output_value:
            continue
        x_rest = tuple(x[i] for i in rest)
        a_rest = tuple(a[i] for i in rest)
        if all(v == 0 for v in x_rest):
            q += p
        sub[(x_rest, a_rest)] = sub.get((x_rest, a_rest), Fraction(0)) + p
    if q == 0:
        return Fraction(0), None
    if not rest:
        return q, None
    table = {k: p / q for k, p in sub.items()}
    return q, JointState._trusted(state.layout.subset(rest), table)


def tensor(s: JointState, t: JointState) -> JointState:
    """Independent composition: p((a,b)|(x,y)) = p_s(a|x) p_t(b|y)."""
    table: dict[Key, Fraction] = {}
    for (xs, as_), ps in s.table.items():
        for (xt, at), pt in t.table.items():
            table[(xs + xt, as_ + at)] = ps * pt
    return JointState._trusted(s.layout.concat(t.layout), table)


def tensor_all(states: Sequence[JointState]) -> JointState:
    result = states[0]
    for s in states[1:]:
        result = tensor(result, s)
    return result


def permute_boxes(state: JointState, perm: Sequence[int]) -> JointState:
    """Relabel boxes: box i of the result is box perm[i] of the input."""
    perm = tuple(perm)
    if sorted(perm) != list(range(len(state.layout))):
        raise ValueError(f"{perm} is not a permutation of the boxes")
    lay = SystemLayout(tuple(state.layout[i] for i in perm))
    table = {(tuple(x[i] for i in perm), tuple(a[i] for i in perm)): p
             for (x, a), p in state.table.items()}
    return JointState._trusted(lay, table)


def mix(states: Sequence[JointState], weights: Sequence) -> JointState:
    """Convex combination of states on a common layout (exact weights)."""
    if len(states) != len(weights):
        raise ValueError("one weight per state required")
    if not states:
        raise ValueError("cannot mix zero states")
    ws = [as_prob(w) for w in weights]
    if sum(ws) != 1:
        raise ValueError(f"weights sum to {sum(ws)}, not 1")
    base = states[0].layout
    for s in states[1:]:
        if s.layout != base:
            raise LayoutMismatchError("mixed states must share a layout")
    table: dict[Key, Fraction] = {}
    for s, w in zip(states, ws):
        if w == 0:
            continue
        for key, p in s.table.items():
            table[key] = table.get(key, Fraction(0)) + w * p
    return JointState._trusted(base, table)


# ---------------------------------------------------------------------------
# Constructors


def deterministic_state(layout: SystemLayout, assignment: Sequence[Sequence[int]],
                        ) -> JointState:
    """Product state with a fixed response function per box.

    `assignment[i][x]` is box i's output on input x. Used as the vertex set
    of the local polytope and by the separating-state construction.
    """
    if len(assignment) != len(layout):
        raise ValueError("need one response function per box")
    fns = []
    for i, box in enumerate(layout.boxes):
        fn = tuple(assignment[i])
        if len(fn) != box.num_inputs:
            raise ValueError(f"box {i}: response must cover all {box.num_inputs} inputs")
        if any(not (0 <= o < box.num_outputs) for o in fn):
            raise ValueError(f"box {i}: response output out of range")
        fns.append(fn)
    table: dict[Key, Fraction] = {}
    for x in layout.input_tuples():
        a = tuple(fns[i][x[i]] for i in range(len(layout)))
        table[(x, a)] = Fraction(1)
    return JointState._trusted(layout, table)


def pr_box() -> JointState:
    """The two-box state with a XOR b = x AND y, each marginal uniform."""
    lay = layout((2, 2), (2, 2))
    table: dict[Key, Fraction] = {}
    half = Fraction(1, 2)
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    if a ^ b == x & y:
                        table[((x, y), (a, b))] = half
    return JointState._trusted(lay, table)


def noisy_pr_box(win) -> JointState:
    """Two-box state whose per-column CHSH win probability is `win`.

    Cells with a XOR b = x AND y carry win/2, the others (1-win)/2. win=1
    is the PR box, win=1/2 is uniform noise, and the state is local exactly
    when 1/4 <= win <= 3/4.
    """
    w = Fraction(win)
    if not 0 <= w <= 1:
        raise ValueError("win probability must lie in [0, 1]")
    lay = layout((2, 2), (2, 2))
    table: dict[Key, Fraction] = {}
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    p = w / 2 if a ^ b == x & y else (1 - w) / 2
                    if p != 0:
                        table[((x, y), (a, b))] = p
    return JointState._trusted(lay, table)


def example_main(N: int) -> JointState:
    """The skewed two-box family: X with inputs {0,1} and outputs {0..N},
    Y a random bit.

    For x=0: p = 1/2 at (a,b)=(0,0) and 1/(2N) at (a>=1, b=1); for x=1 the
    roles of b are swapped. Its entropy vector is (1 + log2(N)/2, 1, 1).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lay = layout((2, N + 1), (1, 2))
    half = Fraction(1, 2)
    small = Fraction(1, 2 * N)
    table: dict[Key, Fraction] = {}
    for x in range(2):
        table[((x, 0), (0, x))] = half
        for a in range(1, N + 1):
            table[((x, 0), (a, 1 - x))] = small
    return JointState._trusted(lay, table)


DAMPING_DENOMINATOR = 2 ** 40


def damping_weight(N: int, k: float) -> tuple[float, Fraction]:
    """Target weight 2k/log2(N) and its rounding to denominator 2^40.

    The true weight is irrational in general; the table uses the rounded
    rational. Both values are returned so callers can report the rounding.
    """
    import math

    if N < 3:
        raise ValueError("N must be >= 3")
    if k <= 0:
        raise ValueError("k must be positive")
    target = 2.0 * k / math.log2(N)
    lam = Fraction(round(target * DAMPING_DENOMINATOR), DAMPING_DENOMINATOR)
    if lam > 1 or target > 1:
        raise ValueError(f"damping weight 2k/log2(N) = {target} exceeds 1; "
                         "increase N or decrease k")
    return target, lam


def example_damped(N: int, k: float) -> JointState:
    """Damped variant of `example_main`: both alphabets gain an extra
    symbol (the last output index) which occurs jointly with weight
    1 - lam, lam = 2k/log2(N) rounded to denominator 2^40.

    Entropy vector: (lam + k + h(lam), lam + h(lam), lam + h(lam)) up to
    the rounding of lam, which tends to (k, 0, 0) as N grows.
    """
    _, lam = damping_weight(N, k)
    lay = layout((2, N + 2), (1, 3))
    extra_a, extra_b = N + 1, 2
    table: dict[Key, Fraction] = {}
    for x in range(2):
        p0 = lam / 2
        if p0 != 0:
            table[((x, 0), (0, x))] = p0
        ps = lam / (2 * N)
        if ps != 0:
            for a in range(1, N + 1):
                table[((x, 0), (a, 1 - x))] = ps
        rest = 1 - lam
        if rest != 0:
            table[((x, 0), (extra_a, extra_b))] = rest
    return JointState._trusted(lay, table)


def classical_realization(N: int) -> JointState:
    """Three classical variables (X0, X1, Y) realizing `example_main`'s
    conditional table when only one of X0, X1 survives the input choice.

    p(a0, a1, b) = 1/(2N) when a0=0, a1>=1, b=0 or a0>=1, a1=0, b=1.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    lay = layout((1, N + 1), (1, N + 1), (1, 2))
    w = Fraction(1, 2 * N)
    table: dict[Key, Fraction] = {}
    for a in range(1, N + 1):
        table[((0, 0, 0), (0, a, 0))] = w
        table[((0, 0, 0), (a, 0, 1))] = w
    return JointState._trusted(lay, table)


# ---------------------------------------------------------------------------
# JSON interface
#
# { "layout": [{"inputs": k, "outputs": l}, ...],
#   "table": [ {"x": [...], "a": [...], "p": "num/den"}, ... ] }
# Zero entries are omitted; round-trips are bit-exact.


def state_to_json_obj(state: JointState) -> dict:
    return {
        "layout": [{"inputs": b.num_inputs, "outputs": b.num_outputs}
                   for b in state.layout.boxes],
        "table": [{"x": list(x), "a": list(a), "p": f"{p.numerator}/{p.denominator}"}
                  for (x, a), p in state.items_sorted()],
    }


def state_from_json_obj(obj: Mapping) -> JointState:
    try:
        lay = SystemLayout(tuple(BoxSpec(b["inputs"], b["outputs"])
                                 for b in obj["layout"]))
        table = {(tuple(e["x"]), tuple(e["a"])): Fraction(e["p"])
                 for e in obj["table"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise TableStructureError(f"malformed state object: {exc}")
    return JointState(lay, table)


def dump_state(state: JointState, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_json_obj(state), fh, indent=1)


def load_state(path) -> JointState:
    with open(path) as fh:
        obj = json.load(fh)
    return state_from_json_obj(obj)
