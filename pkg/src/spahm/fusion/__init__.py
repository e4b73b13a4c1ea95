"""Global state, cost construction, objective and the coordinate-ascent driver."""
from .algorithm import (
    FusionConfig,
    FusionResult,
    FusionTrace,
    MonotonicityError,
    TraceEntry,
    fuse,
    global_atoms,
    initial_hyper,
    match_group,
)
from .cost import (
    COST_PATHS,
    build_cost,
    build_cost_literal,
    build_cost_gaussian,
    build_cost_general,
    prior_gains,
)
from .hypers import DegenerateEstimateWarning, data_objective, estimate_hypers, hyper_step, optimize_hypers
from .objective import conditional_objective, data_log_marginal, eval_objective, ibp_log_prior
from .state import GaussianHyper, GlobalState, LocalGroup, StateError, as_groups

__all__ = [
    "COST_PATHS", "DegenerateEstimateWarning", "FusionConfig", "FusionResult", "FusionTrace",
    "GaussianHyper", "GlobalState", "LocalGroup", "MonotonicityError", "StateError", "TraceEntry",
    "as_groups", "build_cost", "build_cost_literal", "build_cost_gaussian", "build_cost_general",
    "conditional_objective", "data_log_marginal", "data_objective", "estimate_hypers",
    "eval_objective", "fuse", "global_atoms", "hyper_step", "ibp_log_prior", "initial_hyper",
    "match_group", "optimize_hypers", "prior_gains",
]
