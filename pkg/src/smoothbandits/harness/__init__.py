"""Experiment harness: configuration, execution, regret accounting, tuning."""

from .bench import BenchResult, run_bench
from .config import ExperimentConfig, experiment_config_from_kv, load_experiment_config
from .runner import (
    ExperimentResult,
    annotate_benchmarks,
    build_environment,
    build_oracle,
    config_hash,
    run_epsilon_greedy,
    run_experiment,
    run_replicate,
    run_uniform,
)
from .stats import Metric, RegretCurve, bootstrap_ci, compute_regret_curve, default_checkpoints, fit_loglog_slope
from .tuning import tune_eta_pareto, tune_h_holder

__all__ = [
    "BenchResult",
    "ExperimentConfig",
    "ExperimentResult",
    "Metric",
    "RegretCurve",
    "annotate_benchmarks",
    "bootstrap_ci",
    "build_environment",
    "build_oracle",
    "compute_regret_curve",
    "config_hash",
    "default_checkpoints",
    "experiment_config_from_kv",
    "fit_loglog_slope",
    "load_experiment_config",
    "run_bench",
    "run_epsilon_greedy",
    "run_experiment",
    "run_replicate",
    "run_uniform",
    "tune_eta_pareto",
    "tune_h_holder",
]
