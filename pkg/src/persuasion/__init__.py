"""Persuasion of quantal-response receivers: exact threshold solvers for
state-independent sender payoffs, approximation pipeline for state-dependent
payoffs, robustness measurement, and independent LP / Monte Carlo oracles."""

from .model import (
    FULLY_RATIONAL,
    CensorshipParams,
    Instance,
    NumericalError,
    RationalityLevel,
    Scheme,
    SchemeReport,
    Signal,
    ValidationError,
    censorship_params,
    censorship_params_from_json,
    censorship_params_to_json,
    evaluate_log_payoff,
    evaluate_payoff,
    full_reveal,
    instance_from_json,
    instance_to_json,
    log_response,
    make_censorship,
    make_direct,
    mix,
    no_info,
    response,
    response_derivative,
    scheme_from_json,
    scheme_to_json,
    validate_scheme,
)
from .oracle import (
    GridLP,
    SimplexResult,
    SimulationReport,
    build_grid,
    exhaustive_binary_search,
    grid_lp_optimal,
    gumbel_simulate,
    simplex_solve,
)
from .robust import (
    BinaryRobustDesign,
    RobustReport,
    binary_robust_scheme,
    factor_revealing_bound,
    lowerbound_instances,
    robust_ratio,
    sisu_robust_scheme,
)
from .sdsu import (
    BinarySolution,
    GammaCurve,
    PairLP,
    binary_gamma,
    binary_optimal,
    build_gap_lp,
    censorship_m_approx,
    decompose_binary_support,
    direct_m_approx,
    four_approx,
    lowerbound_instance,
    lowerbound_witness,
    optimal_pairwise,
    pair_pool_scheme,
    pairwise_reoptimize,
    solve_gap_fractional,
    solve_gap_integral,
)
from .sisu import (
    MonotonicityReport,
    SearchResult,
    SisuSolution,
    TangentSolution,
    best_direct,
    direct_lowerbound_instance,
    kappa,
    kappa_inverse,
    normalize_instance,
    pool_probability,
    quantal_optimal,
    rational_optimal,
    threshold_monotonicity_check,
)

__all__ = [
    "FULLY_RATIONAL",
    "BinaryRobustDesign",
    "BinarySolution",
    "CensorshipParams",
    "GammaCurve",
    "GridLP",
    "Instance",
    "MonotonicityReport",
    "NumericalError",
    "PairLP",
    "RationalityLevel",
    "RobustReport",
    "Scheme",
    "SchemeReport",
    "SearchResult",
    "Signal",
    "SimplexResult",
    "SimulationReport",
    "SisuSolution",
    "TangentSolution",
    "ValidationError",
    "best_direct",
    "binary_gamma",
    "binary_optimal",
    "binary_robust_scheme",
    "build_gap_lp",
    "build_grid",
    "censorship_m_approx",
    "censorship_params",
    "censorship_params_from_json",
    "censorship_params_to_json",
    "decompose_binary_support",
    "direct_lowerbound_instance",
    "direct_m_approx",
    "evaluate_log_payoff",
    "evaluate_payoff",
    "exhaustive_binary_search",
    "factor_revealing_bound",
    "four_approx",
    "full_reveal",
    "grid_lp_optimal",
    "gumbel_simulate",
    "instance_from_json",
    "instance_to_json",
    "kappa",
    "kappa_inverse",
    "log_response",
    "lowerbound_instance",
    "lowerbound_instances",
    "lowerbound_witness",
    "make_censorship",
    "make_direct",
    "mix",
    "no_info",
    "normalize_instance",
    "optimal_pairwise",
    "pair_pool_scheme",
    "pairwise_reoptimize",
    "pool_probability",
    "quantal_optimal",
    "rational_optimal",
    "response",
    "response_derivative",
    "robust_ratio",
    "scheme_from_json",
    "scheme_to_json",
    "simplex_solve",
    "sisu_robust_scheme",
    "solve_gap_fractional",
    "solve_gap_integral",
    "threshold_monotonicity_check",
    "validate_scheme",
]
