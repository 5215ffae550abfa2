"""Bacteria-foraging multiobjective optimizer with swappable random engines.

Solves the resin-bonded sand mould model by weighted-sum scalarization,
sweeps weight lattices into Pareto frontiers, and scores them with an
exact hypervolume indicator and an average-explorative-rate metric.
"""

from .bfa import (
    Bacterium,
    BfaParams,
    RunResult,
    SwarmState,
    chemotaxis_generation,
    chemotaxis_move,
    eliminate_disperse,
    initialize_swarm,
    reproduce,
    run_bfa,
    run_custom,
    swarming_term,
    tumble_direction,
)
from .engines import (
    EngineConfig,
    EngineKind,
    StochasticEngine,
    gamma_cdf,
    gaussian_cdf,
    make_engine,
    weibull_cdf,
    weibull_inverse_cdf,
)
from .errors import (
    BforageError,
    BudgetError,
    ConfigError,
    DegenerateTraceError,
    DomainError,
    InfeasibleError,
    LatticeError,
    ReferencePointError,
    SchemaError,
    UsageError,
)
from .experiment import (
    ExperimentConfig,
    FrontierReport,
    NADIR_REFERENCE,
    SolutionRecord,
    compare,
    derive_seed,
    generate_weights,
    read_frontier_csv,
    read_trace_csv,
    read_weights_csv,
    run_sweep,
    write_frontier_csv,
    write_report_json,
    write_trace_csv,
    write_weights_csv,
)
from .metrics import aer, hvi_exact, hvi_monte_carlo, hvi_percent_gap, pareto_filter
from .problem import (
    COEFFICIENTS,
    DecisionVector,
    LOWER_BOUNDS,
    ObjectiveVector,
    UPPER_BOUNDS,
    WeightVector,
    aggregate,
    clamp_unit,
    evaluate,
    to_physical,
    to_unit,
)

__version__ = "0.1.0"
