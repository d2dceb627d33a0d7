"""Approximation algorithms for maximum-reward Hamiltonian tours with submodular edge rewards."""

from .graph import (
    Component,
    ContractError,
    IndependenceSystem,
    Instance,
    InvalidInstanceError,
    SystemKind,
    decompose_matching,
    is_independent,
    is_tour,
    tsp_p_value,
)
from .objectives import (
    CardinalityOracle,
    CombinedCostOracle,
    CostMode,
    CoverageOracle,
    CurvatureReport,
    ModularOracle,
    SumOracle,
    ValueOracle,
    coverage_with_length,
    curvature,
    edge_lengths,
    kappa_I_estimate,
    kappa_I_exhaustive,
)
from .greedy import (
    Certificate,
    SolveReport,
    greedy_general,
    greedy_lazy,
    greedy_matching,
    greedy_matching_directed,
    greedy_tour,
    greedy_tour_directed,
    random_tour,
)
from .matching import (
    PRESETS,
    Completion,
    MatchingSource,
    OracleNotSubmodularError,
    PipelineConfig,
    Reduction,
    best_edge_reduction,
    complete_tour,
    linear_relaxation_matching,
    matching_pipeline,
    max_assignment,
    max_weight_two_matching,
    pipeline_ratio,
    reduce_matching,
    reduce_set,
    relaxed_weights,
)
from .exact import (
    BruteForceResult,
    TooLargeError,
    Verdict,
    brute_force_derangement,
    brute_force_tour,
    brute_force_two_matching,
    verify_certificates,
)
from .bench import (
    ALGORITHMS,
    ConfigError,
    ExperimentConfig,
    GeneratorSpec,
    emit,
    generate_instance,
    run_comparison,
    run_curvature_sweep,
    solve,
)

__version__ = "0.1.0"
