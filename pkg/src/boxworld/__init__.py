"""Exact toolkit for non-signalling box states ("box world").

States are exact rational conditional probability tables over layouts of
finite-alphabet boxes. The toolkit computes the measurement entropy (the
minimum outcome entropy over fine-grained adaptive measurements), decides
bipartite locality by exact linear programming over deterministic strategy
pairs, and synthesizes separable states achieving any point of the cone
cut out by non-negativity and subadditivity of the entropy.
"""

__version__ = "0.1.0"

from .boxes import (BoxSpec, JointState, Prob, SystemLayout, ValidationReport,
                    as_prob, classical_realization, condition,
                    deterministic_state, dump_state, example_damped,
                    example_main, layout, load_state, marginalize, mix,
                    noisy_pr_box, permute_boxes, pr_box, state_from_json_obj,
                    state_to_json_obj, tensor, tensor_all, validate_state)
from .cone import (ConeVector, RayDecomposition, RAYS, SeparabilityReport,
                   SynthesisResult, cone_contains, cone_decompose,
                   entropy_match_distribution, ray_state, separability_report,
                   synthesize_state)
from .entropy import (EntropyValue, EntropyVector, binary_entropy,
                      entropy_vector, first_move_entropies,
                      measurement_entropy, measurement_entropy_bruteforce,
                      optimal_strategy, shannon)
from .errors import (BoxworldError, BudgetExceededError, InvalidStateError,
                     LayoutMismatchError, NotAMeasurementError,
                     TableStructureError, UnsupportedLayoutError)
from .locality import (DeterministicStrategy, LocalityResult,
                       enumerate_deterministic, example_damped_decomposition,
                       example_main_decomposition, is_local,
                       pr_noise_threshold, verify_decomposition)
from .measurements import (BasicStrategy, EffectVector, Leaf, MeasureNode,
                           OutcomeDistribution, count_strategies,
                           effect_apply, effects_equal, enumerate_strategies,
                           evaluate_strategy, fiducial_strategy,
                           is_maximally_informative, is_measurement,
                           product_strategy, separating_state,
                           strategy_effects, unit_effect)
from .simplex import lp_feasibility
