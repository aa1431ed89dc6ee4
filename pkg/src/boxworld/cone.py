"""The bipartite entropy region: the cone cut out by non-negativity and
subadditivity, its extremal rays, and synthesis of separable states whose
entropy vectors approach any point of the cone.

The cone is {(x, y, z): x, y, z >= 0, z <= x + y} with extremal rays
e1=(1,0,1), e2=(0,1,1), e3=(1,0,0), e4=(0,1,0). Rays 1 and 2 are hit
exactly by classical pairs (one side deterministic, the other carrying a
chosen Shannon entropy); rays 3 and 4 are approached by the damped family,
whose joint and single-side entropies vanish like 2k/log2(N) while the
other side retains k bits. Tensoring one factor per ray gives a separable
state with at most two non-classical boxes, so its entropy vector is exact
and additive across the factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .boxes import (JointState, SystemLayout, damping_weight, example_damped,
                    layout, permute_boxes, tensor_all)
from .entropy import EntropyValue, binary_entropy, entropy_vector, shannon
from .errors import BudgetExceededError
from .locality import (DEFAULT_CELL_BUDGET, DEFAULT_SIDE_BUDGET,
                       LocalityResult, example_damped_decomposition, is_local,
                       verify_decomposition)

RAYS = ((1, 0, 1), (0, 1, 1), (1, 0, 0), (0, 1, 0))

DEFAULT_TOLERANCE = 1e-9
H_INVERSION_RESIDUAL = 1e-12
MAX_RAY_OUTPUTS = 2 ** 20
DEFAULT_ENTRY_BUDGET = 2_000_000


@dataclass(frozen=True)
class ConeVector:
    """Candidate (H(A), H(B), H(AB)) triple."""

    x: object
    y: object
    z: object

    def as_tuple(self):
        return (self.x, self.y, self.z)

    def member(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        return cone_contains(self, tol)


def _as_triple(v) -> tuple:
    if isinstance(v, ConeVector):
        return v.as_tuple()
    t = tuple(v)
    if len(t) != 3:
        raise ValueError(f"expected a 3-vector, got {v!r}")
    return t


def _is_exact(triple) -> bool:
    return all(isinstance(c, (int, Fraction)) for c in triple)


def cone_contains(v, tol: float = DEFAULT_TOLERANCE) -> bool:
    """Membership test; exact for rational inputs, tolerant for floats."""
    x, y, z = _as_triple(v)
    if _is_exact((x, y, z)):
        return x >= 0 and y >= 0 and z >= 0 and z <= x + y
    x, y, z = float(x), float(y), float(z)
    return (x >= -tol and y >= -tol and z >= -tol and z <= x + y + tol)


@dataclass(frozen=True)
class RayDecomposition:
    """Coefficients over the four extremal rays; reconstruction is exact."""

    lam1: object
    lam2: object
    lam3: object
    lam4: object

    def coefficients(self):
        return (self.lam1, self.lam2, self.lam3, self.lam4)

    def reconstruct(self):
        l1, l2, l3, l4 = self.coefficients()
        return (l1 + l3, l2 + l4, l1 + l2)


def cone_decompose(v, tol: float = DEFAULT_TOLERANCE) -> RayDecomposition:
    """Canonical rule lam1 = min(x, z), lam2 = z - lam1, lam3 = x - lam1,
    lam4 = y - lam2; non-negativity follows from the cone inequalities.
    (The decomposition is not unique; this rule pins one.)"""
    x, y, z = _as_triple(v)
    if not cone_contains((x, y, z), tol):
        raise ValueError(f"{(x, y, z)} is outside the cone")
    if not _is_exact((x, y, z)):
        x, y, z = float(x), float(y), float(z)
    lam1 = min(x, z)
    lam2 = z - lam1
    lam3 = x - lam1
    lam4 = y - lam2
    if not _is_exact((x, y, z)):
        # clear float fuzz on boundary inputs
        lam1, lam2, lam3, lam4 = (0.0 if -tol < c < 0 else c
                                  for c in (lam1, lam2, lam3, lam4))
    return RayDecomposition(lam1, lam2, lam3, lam4)


# ---------------------------------------------------------------------------
# Distributions of prescribed entropy


def entropy_match_distribution(lam: float,
                               residual: float = H_INVERSION_RESIDUAL,
                               ) -> list[Fraction]:
    """Exact rational distribution whose Shannon entropy is lam bits, up to
    `residual`.

    Integer targets return the uniform distribution on 2^lam symbols
    (entropy exactly lam). Otherwise, over m = ceil(2^lam) symbols, the
    family (t, (1-t)/(m-1), ...) sweeps entropy from log2(m) down to 0
    monotonically, and dyadic bisection on t lands within `residual`.
    """
    lam = float(lam)
    if lam < 0:
        raise ValueError("entropy target must be non-negative")
    if lam == 0.0:
        return [Fraction(1)]
    nearest = round(lam)
    if nearest >= 0 and abs(lam - nearest) < residual:
        m = 2 ** int(nearest)
        if m > MAX_RAY_OUTPUTS:
            raise ValueError(f"entropy target {lam} needs more than "
                             f"{MAX_RAY_OUTPUTS} symbols")
        return [Fraction(1, m)] * m

    m = max(2, math.ceil(2.0 ** lam))
    if m > MAX_RAY_OUTPUTS:
        raise ValueError(f"entropy target {lam} needs more than "
                         f"{MAX_RAY_OUTPUTS} symbols")

    def h(t: Fraction) -> float:
        tf = float(t)
        if tf >= 1.0:
            return 0.0
        rest = (1.0 - tf) / (m - 1)
        return -tf * math.log2(tf) - (m - 1) * rest * math.log2(rest)

    lo, hi = Fraction(1, m), Fraction(1)  # h(lo) = log2(m) >= lam >= 0 = h(hi)
    t = lo
    for _ in range(300):
        t = (lo + hi) / 2
        val = h(t)
        if abs(val - lam) <= residual:
            break
        if val >= lam:
            lo = t
        else:
            hi = t
    rest = (1 - t) / (m - 1)
    return [t] + [rest] * (m - 1)


# ---------------------------------------------------------------------------
# Ray factors


@dataclass(frozen=True)
class RayFactor:
    """One two-box factor (A-side box, B-side box) of a synthesized state,
    with its exact separable decomposition and entropy contribution."""

    ray: int
    lam: float
    state: JointState
    terms: tuple  # (weight, A-side state, B-side state)
    vector: tuple[float, float, float]


def _point_state(spec_dims: tuple[int, int], value: int) -> JointState:
    lay = layout(spec_dims)
    return JointState._trusted(
        lay, {((x,), (value,)): Fraction(1) for x in range(spec_dims[0])})


def _distribution_state(dist: Sequence[Fraction]) -> JointState:
    lay = layout((1, len(dist)))
    table = {((0,), (a,)): p for a, p in enumerate(dist) if p != 0}
    return JointState._trusted(lay, table)


def _trivial_factor(ray: int) -> RayFactor:
    a = _point_state((1, 1), 0)
    b = _point_state((1, 1), 0)
    state = tensor_all([a, b])
    return RayFactor(ray, 0.0, state, ((Fraction(1), a, b),), (0.0, 0.0, 0.0))


def ray_factor(ray: int, lam, N: int) -> RayFactor:
    """Build the factor approximating lam times extremal ray `ray`."""
    if ray not in (1, 2, 3, 4):
        raise ValueError(f"ray must be 1..4, got {ray}")
    lam = float(lam)
    if lam < 0:
        raise ValueError("ray coefficient must be non-negative")
    if lam == 0.0:
        return _trivial_factor(ray)

    if ray in (1, 2):
        dist = entropy_match_distribution(lam)
        carrier = _distribution_state(dist)
        point = _point_state((1, 2), 0)
        h = shannon(dist)
        if ray == 1:
            state = tensor_all([carrier, point])
            vec = (h, 0.0, h)
            terms = ((Fraction(1), carrier, point),)
        else:
            state = tensor_all([point, carrier])
            vec = (0.0, h, h)
            terms = ((Fraction(1), point, carrier),)
        return RayFactor(ray, lam, state, terms, vec)

    # Rays 3 and 4: damped family with the non-classical box on the A or B
    # side. The contribution is computed by the exact minimizer, not the
    # closed form, so rounding of the damping weight is reflected honestly.
    state = example_damped(N, lam)
    terms = tuple(example_damped_decomposition(N, lam))
    vec = entropy_vector(state, [(0,), (1,)]).bipartite()
    if ray == 4:
        state = permute_boxes(state, (1, 0))
        terms = tuple((w, b, a) for (w, a, b) in terms)
        vec = (vec[1], vec[0], vec[2])
    return RayFactor(ray, lam, state, terms, vec)


def ray_state(ray: int, lam, N: int) -> JointState:
    """Two-box state whose entropy vector approximates lam times the ray."""
    return ray_factor(ray, lam, N).state


# ---------------------------------------------------------------------------
# Synthesis


@dataclass(frozen=True)
class SynthesisResult:
    """Product of the four ray factors, its entropy vector, and the error.

    The joint state interleaves factor boxes as (A1, B1, A2, B2, ...), so
    the A party is the even indices. `achieved` sums the factor vectors
    (exact: the joint has at most two non-classical boxes, where the
    minimum is additive over product factors); `joint_state()` materializes
    the full table on demand, refusing beyond `entry_budget` nonzeros.
    """

    target: tuple[float, float, float]
    decomposition: RayDecomposition
    scale: int
    factors: tuple[RayFactor, ...]
    achieved: tuple[float, float, float]
    error: float

    @property
    def a_boxes(self) -> tuple[int, ...]:
        return tuple(range(0, 2 * len(self.factors), 2))

    @property
    def b_boxes(self) -> tuple[int, ...]:
        return tuple(range(1, 2 * len(self.factors), 2))

    @property
    def exact(self) -> bool:
        return sum(f.state.layout.non_classical_count()
                   for f in self.factors) <= 2

    def joint_nonzeros(self) -> int:
        n = 1
        for f in self.factors:
            n *= len(f.state.table)
        return n

    def joint_state(self, entry_budget: int = DEFAULT_ENTRY_BUDGET) -> JointState:
        n = self.joint_nonzeros()
        if n > entry_budget:
            raise BudgetExceededError(
                f"joint table would have {n} nonzero entries "
                f"(budget {entry_budget})")
        return tensor_all([f.state for f in self.factors])

    def separable_terms(self) -> list[tuple[Fraction, JointState, JointState]]:
        """Explicit mixture of A x B product states equal to the joint."""
        out = []
        for combo in product(*(f.terms for f in self.factors)):
            w = Fraction(1)
            for wi, _a, _b in combo:
                w *= wi
            a_state = tensor_all([t[1] for t in combo])
            b_state = tensor_all([t[2] for t in combo])
            out.append((w, a_state, b_state))
        return out

    def to_json_obj(self) -> dict:
        return {
            "target": list(self.target),
            "decomposition": [float(c) for c in self.decomposition.coefficients()],
            "scale": self.scale,
            "achieved": list(self.achieved),
            "error": self.error,
            "exact": self.exact,
        }


def synthesize_state(v, N: int) -> SynthesisResult:
    """Separable state whose entropy vector approximates v (in the cone).

    Ray-1/2 components are matched to the h-inversion residual; ray-3/4
    components converge like 2*lam/log2(N), so the error is reported rather
    than promised. N is only consulted when lam3 or lam4 is positive.
    """
    triple = _as_triple(v)
    if not cone_contains(triple):
        raise ValueError(f"{triple} is outside the cone")
    decomp = cone_decompose(triple)
    coeffs = decomp.coefficients()
    factors = tuple(ray_factor(i + 1, c, N) for i, c in enumerate(coeffs))
    achieved = tuple(sum(f.vector[i] for f in factors) for i in range(3))
    target_f = tuple(float(c) for c in triple)
    error = max(abs(a - t) for a, t in zip(achieved, target_f))
    return SynthesisResult(target_f, decomp, N, factors, achieved, error)


def closed_form_damped_vector(N: int, k: float) -> tuple[float, float, float]:
    """(lam + k + h(lam), lam + h(lam), lam + h(lam)) at the rounded lam."""
    _, lam = damping_weight(N, k)
    lf = float(lam)
    half_log = lf * math.log2(N) / 2.0
    h = binary_entropy(lf)
    return (lf + half_log + h, lf + h, lf + h)


# ---------------------------------------------------------------------------
# Separability certification


@dataclass(frozen=True)
class SeparabilityReport:
    synthesis: SynthesisResult
    method: str  # "lp" or "product-decomposition"
    local: bool
    lp_result: LocalityResult | None
    decomposition_verified: bool | None
    joint_materialized: bool

    @property
    def status(self) -> str:
        return "LOCAL" if self.local else "NONLOCAL"

    def to_json_obj(self) -> dict:
        obj = self.synthesis.to_json_obj()
        obj.update({"status": self.status, "certificate": self.method,
                    "joint_materialized": self.joint_materialized})
        if self.lp_result is not None:
            obj["lp"] = self.lp_result.to_json_obj()
        if self.decomposition_verified is not None:
            obj["decomposition_verified"] = self.decomposition_verified
        return obj


def separability_report(v, N: int,
                        side_budget: int = DEFAULT_SIDE_BUDGET,
                        cell_budget: int = DEFAULT_CELL_BUDGET,
                        entry_budget: int = DEFAULT_ENTRY_BUDGET,
                        ) -> SeparabilityReport:
    """Synthesize a state for v and certify it local across A|B.

    Small instances get an LP certificate with exact weights; when the LP
    or the joint table exceeds its budget, the explicit product-of-ray-
    states decomposition is verified instead (against the joint table when
    it fits, else factor by factor, which suffices since a product of
    separable states is separable).
    """
    synth = synthesize_state(v, N)
    sigma = None
    try:
        sigma = synth.joint_state(entry_budget)
    except BudgetExceededError:
        pass

    if sigma is not None:
        try:
            res = is_local(sigma, (synth.a_boxes, synth.b_boxes),
                           side_budget=side_budget, cell_budget=cell_budget)
            return SeparabilityReport(synth, "lp", res.local, res, None, True)
        except BudgetExceededError:
            pass

    if sigma is not None:
        ok = verify_decomposition(sigma, synth.separable_terms(),
                                  partition=(synth.a_boxes, synth.b_boxes))
    else:
        ok = all(verify_decomposition(f.state, f.terms) for f in synth.factors)
    return SeparabilityReport(synth, "product-decomposition", ok, None, ok,
                              sigma is not None)
