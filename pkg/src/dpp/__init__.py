"""Planning and analysis for decision processes ranked by preferences over trajectory distributions.

Everything is exact: probabilities are :class:`fractions.Fraction`,
distributions are :class:`Dist`, and relations are oracles answering
``compare(A, B)`` with a :class:`Cmp`.
"""

from .dist import Dist, mix, mixture
from .errors import (ContractError, DomainError, DPPError, InputError, LimitExceededError,
                     PolicyUndefinedError, RelationNotTotalError)
from .features import (EmbeddedRelation, FeatureMap, GammaWeights, check_markov_feature, embedded_relation,
                       feature_policy_exists, frequency, frequency_reward_relation, k_window_feature,
                       plan_frequency)
from .model import (DPP, Environment, Interface, Policy, attainable, cylinder, outcome_dist,
                    outcome_dist_after_action)
from .planner import (brute_force_optimal, optimal_action_sets, plan_backward, policy_value,
                      value_iteration, verify_optimal)
from .preorders import (AXIOMS, Cmp, PreferenceRelation, TestsetSpec, build_testset, check_axiom,
                        expected_reward_relation, expected_utility_relation, lexicographic_relation,
                        mixture_monotonicity_check, risk_relation)
from .representability import affine_equivalence, fit_feature_reward, fit_utility

__version__ = "0.1.0"

__all__ = [
    "AXIOMS", "Cmp", "ContractError", "DPP", "DPPError", "Dist", "DomainError", "EmbeddedRelation",
    "Environment", "FeatureMap", "GammaWeights", "InputError", "Interface", "LimitExceededError", "Policy",
    "PolicyUndefinedError", "PreferenceRelation", "RelationNotTotalError", "TestsetSpec", "affine_equivalence",
    "attainable", "brute_force_optimal", "build_testset", "check_axiom", "check_markov_feature", "cylinder",
    "embedded_relation", "expected_reward_relation", "expected_utility_relation", "feature_policy_exists",
    "fit_feature_reward", "fit_utility", "frequency", "frequency_reward_relation", "k_window_feature",
    "lexicographic_relation", "mix", "mixture", "mixture_monotonicity_check", "optimal_action_sets",
    "outcome_dist", "outcome_dist_after_action", "plan_backward", "plan_frequency", "policy_value",
    "risk_relation", "value_iteration", "verify_optimal",
]
