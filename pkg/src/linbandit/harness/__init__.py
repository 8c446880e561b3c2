from .config import ConfigError, ExperimentConfig
from .runner import (
    BatchResult,
    ScalingFit,
    SummaryStats,
    estimate_bayes_risk,
    estimate_regret,
    fit_scaling,
    run_batch,
    run_replications,
    run_trajectory,
    simulate,
)
