"""Seeded random generators used by the property suite and tests.

There is no tractable uniform sampler of the no-signalling polytope;
states are sampled as exact-rational mixtures of random product states,
optionally blended with an input-clamped PR pattern so that non-local
states are exercised too.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .boxes import (BoxSpec, JointState, Key, SystemLayout, mix, tensor_all)
from .measurements import BasicStrategy, Leaf, MeasureNode, count_strategies


def rational_distribution(rng: random.Random, size: int,
                          resolution: int = 12) -> list[Fraction]:
    """Random exact distribution from integer weights; zeros allowed."""
    while True:
        weights = [rng.randrange(0, resolution + 1) for _ in range(size)]
        total = sum(weights)
        if total:
            return [Fraction(w, total) for w in weights]


def random_single_box_state(spec: BoxSpec, rng: random.Random) -> JointState:
    """Arbitrary per-input distributions (single boxes have no constraints)."""
    lay = SystemLayout((spec,))
    table: dict[Key, Fraction] = {}
    for x in range(spec.num_inputs):
        for a, p in enumerate(rational_distribution(rng, spec.num_outputs)):
            if p:
                table[((x,), (a,))] = p
    return JointState._trusted(lay, table)


def random_product_state(lay: SystemLayout, rng: random.Random) -> JointState:
    return tensor_all([random_single_box_state(b, rng) for b in lay.boxes])


def _pr_pattern(lay: SystemLayout) -> JointState:
    """PR correlations on the {0,1} sub-alphabets, inputs clamped to {0,1}.

    Marginals are uniform bits whatever the inputs, so the pattern is
    no-signalling on any 2-box layout with k, l >= 2.
    """
    table: dict[Key, Fraction] = {}
    half = Fraction(1, 2)
    for x in range(lay[0].num_inputs):
        for y in range(lay[1].num_inputs):
            for a in range(2):
                b = a ^ (min(x, 1) & min(y, 1))
                table[((x, y), (a, b))] = half
    return JointState._trusted(lay, table)


def random_state(lay: SystemLayout, rng: random.Random,
                 max_terms: int = 4, allow_pr: bool = True) -> JointState:
    """Random mixture of product states, sometimes with a PR admixture."""
    terms = [random_product_state(lay, rng)
             for _ in range(rng.randint(1, max_terms))]
    if (allow_pr and len(lay) == 2 and rng.random() < 0.5
            and all(b.num_inputs >= 2 and b.num_outputs >= 2 for b in lay.boxes)):
        terms.append(_pr_pattern(lay))
    weights = rational_distribution(rng, len(terms))
    return mix(terms, weights)


def random_layout(rng: random.Random, min_boxes: int = 1, max_boxes: int = 3,
                  max_inputs: int = 3, max_outputs: int = 3,
                  min_outputs: int = 1,
                  strategy_cap: int | None = None) -> SystemLayout:
    """Random layout; with `strategy_cap`, resampled until the strategy
    count is enumerable within the cap."""
    while True:
        boxes = tuple(BoxSpec(rng.randint(1, max_inputs),
                              rng.randint(min_outputs, max_outputs))
                      for _ in range(rng.randint(min_boxes, max_boxes)))
        lay = SystemLayout(boxes)
        if strategy_cap is None or count_strategies(lay) <= strategy_cap:
            return lay


def random_strategy(lay: SystemLayout, rng: random.Random) -> BasicStrategy:
    """Random adaptive decision tree with canonical (injective) labels."""
    n = len(lay)

    def build(remaining: tuple[int, ...], outputs: dict):
        if not remaining:
            return Leaf(tuple(outputs[i] for i in range(n)))
        i = rng.choice(remaining)
        rest = tuple(j for j in remaining if j != i)
        xv = rng.randrange(lay[i].num_inputs)
        return MeasureNode(i, xv, tuple(
            build(rest, {**outputs, i: out})
            for out in range(lay[i].num_outputs)))

    return BasicStrategy(lay, build(tuple(range(n)), {}))


def random_cone_member(rng: random.Random, scale: int = 8,
                       resolution: int = 16) -> tuple[Fraction, Fraction, Fraction]:
    """Random rational point of the cone {x,y,z >= 0, z <= x+y}."""
    x = Fraction(rng.randrange(0, scale * resolution + 1), resolution)
    y = Fraction(rng.randrange(0, scale * resolution + 1), resolution)
    zmax = (x + y) * resolution
    z = Fraction(rng.randrange(0, int(zmax) + 1), resolution)
    return (x, y, z)
