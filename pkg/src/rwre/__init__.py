"""Random walks in random environment on the integer line: exact quenched
statistics, reproducible Monte Carlo, and large-deviation rate functions.

The package splits into environment sampling (`environment`), closed-form
crossing moments (`quenched`), walk simulation with counter-based randomness
(`rng`, `walks`), statistical estimators and event detectors (`stats`),
rate-function machinery (`ldp`), independent oracles used by the test suite
(`oracles`), and the experiment harness behind the `rwre` CLI
(`experiments`, `reporting`, `figures`, `cli`).
"""

from .environment import (
    Classification,
    EnvDistribution,
    EnvironmentWindow,
    LadderDecomposition,
    RejectionBudgetError,
    TailExponent,
    WindowError,
    alpha_for_s,
    homogeneous_family,
    ladder_decompose,
    pi_product,
    potential,
    sample_window_P,
    sample_window_Q,
    solomon_classify,
    solve_s,
    two_point_family,
    w_sum,
    window_from_values,
)
from .experiments import ConfigError, EXPERIMENT_NAMES, experiment_catalog, resolve_config
from .ldp import (
    LogMgfGrid,
    RateFunctionTable,
    conditioned_mgf_psi,
    estimate_log_mgf,
    jbar,
    lambda_bar,
    lambda_grid_2d,
    legendre_conjugate,
    make_rate_table,
    mgf_phi,
    rate_r,
    write_rate_table_csv,
)
from .quenched import (
    BlockMoments,
    InsufficientLadderError,
    annealed_mean_crossing,
    block_moments,
    block_moments_range,
    centering_Z,
    clt_sigma2,
    hitting_prob,
    quenched_mean_T,
    quenched_var_T,
    reflected_mean_total,
    reflection_blocks,
    truncation_bound,
    write_block_csv,
)
from .reporting import canonical_payload, config_hash, execute_config
from .rng import CounterStream, derive, derive_array, uniform, uniform_array
from .stats import (
    EmpiricalDistribution,
    EventReport,
    HillEstimate,
    detect_dominant_block,
    detect_uniform_blocks,
    empirical_laplace,
    hill_estimator,
    ks_distance,
)
from .walks import (
    DistDD,
    PathSample,
    RegenerationRecord,
    extract_regenerations,
    harvest_regenerations,
    hitting_times_fixed_env,
    simulate_hitting,
    simulate_reflected,
    simulate_walk_dD,
    walk_final_positions,
)

__version__ = "0.1.0"

__all__ = [
    "BlockMoments",
    "Classification",
    "ConfigError",
    "CounterStream",
    "DistDD",
    "EXPERIMENT_NAMES",
    "EmpiricalDistribution",
    "EnvDistribution",
    "EnvironmentWindow",
    "EventReport",
    "HillEstimate",
    "InsufficientLadderError",
    "LadderDecomposition",
    "LogMgfGrid",
    "PathSample",
    "RateFunctionTable",
    "RegenerationRecord",
    "RejectionBudgetError",
    "TailExponent",
    "WindowError",
    "alpha_for_s",
    "annealed_mean_crossing",
    "block_moments",
    "block_moments_range",
    "canonical_payload",
    "centering_Z",
    "clt_sigma2",
    "conditioned_mgf_psi",
    "config_hash",
    "derive",
    "derive_array",
    "detect_dominant_block",
    "detect_uniform_blocks",
    "empirical_laplace",
    "estimate_log_mgf",
    "execute_config",
    "experiment_catalog",
    "extract_regenerations",
    "harvest_regenerations",
    "hill_estimator",
    "hitting_prob",
    "hitting_times_fixed_env",
    "homogeneous_family",
    "jbar",
    "ks_distance",
    "ladder_decompose",
    "lambda_bar",
    "lambda_grid_2d",
    "legendre_conjugate",
    "make_rate_table",
    "mgf_phi",
    "pi_product",
    "potential",
    "quenched_mean_T",
    "quenched_var_T",
    "rate_r",
    "reflected_mean_total",
    "reflection_blocks",
    "resolve_config",
    "sample_window_P",
    "sample_window_Q",
    "simulate_hitting",
    "simulate_reflected",
    "simulate_walk_dD",
    "solomon_classify",
    "solve_s",
    "truncation_bound",
    "two_point_family",
    "uniform",
    "uniform_array",
    "w_sum",
    "walk_final_positions",
    "window_from_values",
    "write_block_csv",
    "write_rate_table_csv",
]
