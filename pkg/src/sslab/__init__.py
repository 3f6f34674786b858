"""sslab: Shapley-Scarf housing-market integration toolkit.

Core pieces: a traced top-trading-cycles solver, segregated-vs-integrated
welfare analysis, worst-case instance constructors, seeded Monte-Carlo
machinery for random markets, the staircase (sequential-dual-dictator)
preference domain, and brute-force oracles for small instances.
"""
from ._backend import BACKEND, NUMBA_ENABLED
from .integration import (CycleBoundCheck, ExtendedHousingMarket,
                          IntegrationReport, MatchingScheme, analyze,
                          check_cycle_bound, integrate, make_ehm,
                          restrict_preferences, solve_scheme)
from .market import (Allocation, BlockingCoalition, HousingMarket,
                     InstanceTooLargeError, MarketValidationError, TTCTrace,
                     brute_force_core, find_blocking_coalition,
                     is_individually_rational, is_pareto_optimal, rank,
                     rank_histogram, ttc_solve, validate_market)
from .random_markets import (ExpectedGain, HarmonicNumber, SimulationConfig,
                             SimulationSummary, StatTriple, expected_cycles,
                             expected_gain, expected_rank_sum, half_harm_threshold,
                             harmed_bound, harmed_bound_total, harmonic,
                             rsd_allocation, rsd_equivalence_check,
                             run_simulation, sample_ehm)
from .sdd import (SddBoundReport, SddDiagnostic, SddDomainError,
                  sample_sdd_profile, sdd_diagnostic, verify_sdd_bound)
from .worst_case import (ExtremalityReport, WorstCaseSpec, build_worst_case,
                         build_worst_case_nk, near_equal_sizes, verify_extremal,
                         worst_case_gamma_bar)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "NUMBA_ENABLED", "__version__",
    # market
    "HousingMarket", "Allocation", "TTCTrace", "BlockingCoalition",
    "MarketValidationError", "InstanceTooLargeError",
    "validate_market", "rank", "ttc_solve", "find_blocking_coalition",
    "brute_force_core", "is_individually_rational", "is_pareto_optimal",
    "rank_histogram",
    # integration
    "ExtendedHousingMarket", "MatchingScheme", "IntegrationReport",
    "CycleBoundCheck", "make_ehm", "restrict_preferences", "solve_scheme",
    "analyze", "integrate", "check_cycle_bound",
    # worst case
    "WorstCaseSpec", "ExtremalityReport", "build_worst_case",
    "build_worst_case_nk", "worst_case_gamma_bar", "verify_extremal",
    "near_equal_sizes",
    # random markets
    "HarmonicNumber", "ExpectedGain", "SimulationConfig", "SimulationSummary",
    "StatTriple", "harmonic", "expected_rank_sum", "expected_cycles",
    "expected_gain", "harmed_bound", "harmed_bound_total",
    "half_harm_threshold", "sample_ehm", "run_simulation", "rsd_allocation",
    "rsd_equivalence_check",
    # staircase domain
    "SddDiagnostic", "SddBoundReport", "SddDomainError", "sdd_diagnostic",
    "sample_sdd_profile", "verify_sdd_bound",
]
