"""Blow-up calculus for local monomial forms of morphisms of 3-folds."""
from .algebra import Constant, Status
from .charts import Center, divide_rows, enumerate_charts, normalize, substitute
from .engines import (
    ValuationState,
    compute_invariant,
    resolve_dependent_valuation,
    run_lemma_a,
    run_lemma_b,
    run_pair_ordering,
)
from .forms import (
    LocalForm,
    check_cuspidal,
    classify_prepared,
    classify_toroidal_morphism,
    classify_toroidal_pair,
    mixed_series,
    translate,
    trivial,
    unit_series,
    validate,
)
from .oracle import cross_check_matrix, golden_case_table, verify_chain

__all__ = [
    "Center", "Constant", "LocalForm", "Status", "ValuationState",
    "check_cuspidal", "classify_prepared", "classify_toroidal_morphism", "classify_toroidal_pair",
    "compute_invariant", "cross_check_matrix", "divide_rows", "enumerate_charts", "golden_case_table",
    "mixed_series", "normalize", "resolve_dependent_valuation", "run_lemma_a", "run_lemma_b",
    "run_pair_ordering", "substitute", "translate", "trivial", "unit_series", "validate", "verify_chain",
]

__version__ = "0.1.0"
