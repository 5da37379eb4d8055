"""Multi-task and multi-fidelity Bayesian optimization.

A single Gaussian process models the objective jointly over parameters
and fidelities; each step picks the (x, z) query maximizing information
gained about the target-fidelity maximum per unit query cost.
"""

from .acquisition import (
    AcquisitionContext,
    KnownCost,
    LearnedLogCost,
    PerFidelityCost,
    cost_weighted,
    expected_improvement,
    fit_log_cost,
    information_terms,
    mes,
    mumbo,
)
from .benchmarks import (
    Benchmark,
    benchmark,
    evaluate,
    initial_design,
    list_benchmarks,
    simple_regret,
)
from .errors import (
    BinarySearchError,
    ConfigError,
    DegenerateCorrelationError,
    DimensionMismatchError,
    MumboError,
    NonFiniteIntegrandError,
    NonFiniteObjectiveError,
    NotPositiveDefiniteError,
    NumericalUnderflowError,
    OptimizationFailureError,
    OutOfBoundsError,
    QuadratureNegativityError,
    RunError,
    StaleSamplesError,
    UnknownOptimumError,
    ZeroCostError,
)
from .gp import (
    BivariatePrediction,
    ContinuousFidelity,
    Dataset,
    DiscreteFidelity,
    GpModel,
    KernelSpec,
    SearchSpace,
    fit_hyperparameters,
    fit_posterior,
    fold_average_prediction,
    joint_prediction,
    kernel_eval,
    kernel_matrix,
    log_marginal_likelihood,
    make_model,
    predict_marginal,
)
from .harness import (
    BatchReport,
    RunConfig,
    RunTrace,
    config_from_dict,
    incumbent,
    load_config,
    read_timings,
    read_trace,
    run_batch,
    run_bo,
    write_trace,
)
from .maxval import (
    MaxValueSamples,
    build_grid,
    max_value_quantile,
    sample_max_values,
)
from .numerics import (
    EsgParams,
    QuadratureGrid,
    esg_density,
    esg_mean_var,
    esg_moments,
    log_normal_cdf,
    normal_cdf,
    normal_pdf,
    simpson_integrate,
)
from .optimizer import (
    DirectConfig,
    SearchResult,
    direct_maximize,
    maximize_over_space,
)

__version__ = "0.1.0"
