"""Expected-utility representations under twofold uncertainty.

Check preference axioms on finite comparison data, evaluate and normalize
expected-utility representations, decide whether a joint belief factors into
marginal products, and fit representations to preference datasets.
"""

from .axioms import (
    AxiomReport,
    check_dominance,
    check_invariance,
    check_three_factor_axioms,
    check_two_factor_axioms,
    check_weak_order,
    check_weak_separability,
)
from .conditionals import (
    ConditionalRelation,
    PreferenceDataset,
    Verdict,
    check_cell_natural_order,
    conditional_on,
)
from .core import (
    EURepresentation,
    JointBelief,
    Plan,
    ProductBelief,
    Prospect,
    StateSpace,
    UtilityFunction,
    default_space,
    identity_utility,
    make_plan,
    make_prospect,
    marginal_beliefs,
    product_to_joint,
    uniform_belief,
)
from .fitting import (
    FitConfig,
    FitResult,
    IndependenceAssessment,
    check_independence,
    count_violations,
    fit,
)
from .generators import gen_agent, gen_demo_2x2, gen_invariance_counterexample
from .representation import (
    FactorizationResult,
    evaluate_plan,
    evaluate_prospect,
    evaluate_prospect_nested,
    evaluate_representation,
    factorize,
    induced_preference,
    normalize_representation,
)

__version__ = "0.1.0"

__all__ = [
    "AxiomReport",
    "ConditionalRelation",
    "EURepresentation",
    "FactorizationResult",
    "FitConfig",
    "FitResult",
    "IndependenceAssessment",
    "JointBelief",
    "Plan",
    "PreferenceDataset",
    "ProductBelief",
    "Prospect",
    "StateSpace",
    "UtilityFunction",
    "Verdict",
    "check_cell_natural_order",
    "check_dominance",
    "check_independence",
    "check_invariance",
    "check_three_factor_axioms",
    "check_two_factor_axioms",
    "check_weak_order",
    "check_weak_separability",
    "conditional_on",
    "count_violations",
    "default_space",
    "evaluate_plan",
    "evaluate_prospect",
    "evaluate_prospect_nested",
    "evaluate_representation",
    "factorize",
    "fit",
    "gen_agent",
    "gen_demo_2x2",
    "gen_invariance_counterexample",
    "identity_utility",
    "induced_preference",
    "make_plan",
    "make_prospect",
    "marginal_beliefs",
    "normalize_representation",
    "product_to_joint",
    "uniform_belief",
]
