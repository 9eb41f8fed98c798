"""Spectral cut-off regularisation with a discretised discrepancy principle."""

from .discrepancy import (
    DpConfig,
    DpResult,
    FixedM,
    Heuristic,
    NormBound,
    cutoff_estimate,
    discrepancy_index,
    discrepancy_indices,
    error_components,
    estimation_error,
    modified_discrepancy,
    norm_bound_level,
)
from .estimator import DiscrepancyCutoff, SpectralCutoff
from .experiments import (
    ExperimentConfig,
    RunRecord,
    coverage,
    mse_vs_analytic,
    rate_regression,
    run_experiment,
    summarize,
)
from .sequence_model import (
    FlatJ,
    Hoelder,
    Logarithmic,
    Observation,
    PowerDecay,
    RandomSphere,
    SolutionSpec,
    forward,
    make_solution,
    observe,
    tail_bound,
)
from .spectrum import (
    Exponential,
    Polynomial,
    ScaledExponential,
    ScaledPolynomial,
    Table,
    load_table,
    singular_value,
    variance_sum,
)
from .theory import (
    RateSpec,
    analytic_mse,
    apriori_k_exp,
    apriori_k_poly,
    m_opt_exp,
    power_exp_asymptotic,
    rate_constant_poly,
    rate_exp,
    rate_poly,
    solve_power_exp,
)

__version__ = "0.1.0"
