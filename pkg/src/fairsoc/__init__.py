"""fairsoc: evolutionary societies of utility-maximizing agents.

Agents split the day between leisure and labor, choose how many children to
raise, and live or die by how hard they worked. Four allocation strategies
(selfish, planned, max-min, planned max-min) are run over generations and
compared on growth, inequality, mortality, and survival.
"""

from ._version import __version__
from .config import (
    ExperimentConfig,
    OptimizerConfig,
    config_digest,
    from_mapping,
    load_config,
    merged,
    to_mapping,
)
from .economy import (
    DAY_HOURS,
    Preferences,
    choose_k,
    consumption,
    family_utility,
    fertility_bracket,
    mortality,
    sigma_weight,
    utility,
)
from .errors import (
    ConfigError,
    DomainError,
    InvariantViolation,
    OptimizerError,
    ParameterError,
    StateError,
    UndefinedStatisticError,
)
from .evolution import (
    Agent,
    EvolutionSettings,
    GenerationRecord,
    Society,
    SocietyResult,
    StreamBundle,
    bundle_streams,
    found_society,
    mate_pairs,
    reproduce,
    run_society,
    step_generation,
)
from .metrics import (
    ExperimentReport,
    SocietySummary,
    StrategyReportRow,
    build_report,
    coefficient_of_variation,
    count_recessions,
    format_report,
    growth_series,
    mortality_rate,
    skewness,
    summarize_society,
)
from .optimizer import (
    Objective,
    SimplexOptions,
    bounded_transform,
    inverse_transform,
    maximize,
    nelder_mead_max,
)
from .plotting import emit_histogram, sturges_bins
from .runner import ExperimentOutcome, load_results, run_experiment, simulate
from .stochastics import (
    Purpose,
    RngStream,
    bernoulli,
    derive_stream,
    exponential,
    gaussian,
    poisson,
    uniform01,
)
from .strategies import (
    AllocationResult,
    SocietyParams,
    StrategyKind,
    allocate,
    belief_per_capita,
    myopic_others_labor,
    objective_value,
)

__all__ = [
    "__version__",
    "DAY_HOURS",
    "Agent",
    "AllocationResult",
    "ConfigError",
    "DomainError",
    "EvolutionSettings",
    "ExperimentConfig",
    "ExperimentOutcome",
    "GenerationRecord",
    "InvariantViolation",
    "Objective",
    "OptimizerConfig",
    "OptimizerError",
    "ParameterError",
    "Preferences",
    "Purpose",
    "ExperimentReport",
    "RngStream",
    "SimplexOptions",
    "Society",
    "SocietyParams",
    "SocietyResult",
    "SocietySummary",
    "StateError",
    "StrategyKind",
    "StrategyReportRow",
    "StreamBundle",
    "UndefinedStatisticError",
    "allocate",
    "belief_per_capita",
    "bernoulli",
    "bounded_transform",
    "build_report",
    "bundle_streams",
    "choose_k",
    "coefficient_of_variation",
    "config_digest",
    "consumption",
    "count_recessions",
    "derive_stream",
    "emit_histogram",
    "exponential",
    "family_utility",
    "fertility_bracket",
    "format_report",
    "found_society",
    "from_mapping",
    "gaussian",
    "growth_series",
    "inverse_transform",
    "load_config",
    "load_results",
    "mate_pairs",
    "maximize",
    "merged",
    "mortality",
    "mortality_rate",
    "myopic_others_labor",
    "nelder_mead_max",
    "objective_value",
    "poisson",
    "reproduce",
    "run_experiment",
    "run_society",
    "sigma_weight",
    "simulate",
    "skewness",
    "step_generation",
    "sturges_bins",
    "summarize_society",
    "to_mapping",
    "uniform01",
    "utility",
]
