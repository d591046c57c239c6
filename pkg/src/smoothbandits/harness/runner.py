"""Experiment execution: learners x environments -> CSV artifacts.

One experiment = one config run over ``replicates`` seeds (seed, seed+1, ...).
Each replicate writes a per-round CSV; a summary CSV and a manifest are
written once all replicates finish. Everything except the manifest
timestamp is byte-reproducible from the config.
"""

from __future__ import annotations

import functools
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np

from .. import __version__
from ..core import (
    Action,
    ActionSpace,
    Context,
    DiscreteAction,
    FiniteActions,
    IntervalActions,
    RoundLog,
    SmoothingCap,
    seeded_rng,
    validate_loss,
)
from ..corral import gamma_h_grid, run_adaptive
from ..environments import (
    Environment,
    HolderSpec,
    MultipleBestArmsSpec,
    load_arm_dataset,
    load_regression_dataset,
    make_constant_env,
    make_holder_env,
    make_multiple_best_arms,
)
from ..regression_oracles import (
    AggregationOracle,
    ParametricOracle,
    RegressionOracle,
    TabularOracle,
    WeightedExample,
    default_regsq_estimate,
)
from ..smooth_igw import SmoothIgwLearner, gamma_for_horizon
from ..smooth_igw import run as run_smooth_igw
from .config import ExperimentConfig
from .stats import Metric, bootstrap_ci

__all__ = [
    "ExperimentResult",
    "REALIZED_HEADER",
    "ROUNDS_HEADER",
    "SUMMARY_HEADER",
    "annotate_benchmarks",
    "build_environment",
    "build_oracle",
    "config_hash",
    "render_replicate_tables",
    "run_epsilon_greedy",
    "run_experiment",
    "run_replicate",
    "run_uniform",
]

ROUNDS_HEADER = "t,base_index,action,realized_loss,mean_loss,benchmark,cum_smooth_regret,cum_standard_regret"
REALIZED_HEADER = "t,cum_smooth_regret_realized,cum_standard_regret_realized,progressive_loss"
SUMMARY_HEADER = "config_hash,seed,T,final_smooth_regret,final_standard_regret,final_progressive_loss,ci_lo,ci_hi"


def config_hash(config: ExperimentConfig) -> str:
    payload = json.dumps(config.model_dump(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


# -- construction -----------------------------------------------------------


def build_environment(config: ExperimentConfig, seed: int) -> Environment:
    """Instantiate the configured environment with its own labeled streams."""
    spec = config.environment
    init_rng = seeded_rng(seed, "env-init")
    noise_rng = seeded_rng(seed, "env")
    if spec.kind == "multiple_best_arms":
        env = make_multiple_best_arms(
            MultipleBestArmsSpec(
                arms=spec.arms,
                optimal_arms=spec.optimal_arms,
                optimal_mean=spec.optimal_mean,
                suboptimal_mean=spec.suboptimal_mean,
            ),
            init_rng,
        )
        env.rng = noise_rng
        return env
    if spec.kind == "holder":
        env = make_holder_env(HolderSpec(L=spec.L, alpha=spec.alpha), spec.context_dim, init_rng)
        env.rng = noise_rng
        return env
    if spec.kind == "arm_dataset":
        return load_arm_dataset(spec.path, noise_rng)
    if spec.kind == "regression_dataset":
        rff = config.oracle_settings.rff_features if config.oracle == "parametric_rff" else None
        return load_regression_dataset(
            spec.path,
            init_rng,
            shuffle=spec.shuffle,
            rff_features=rff,
            rff_bandwidth=config.oracle_settings.rff_bandwidth,
        )
    if spec.kind == "constant":
        space: ActionSpace = FiniteActions(spec.arms) if spec.arms else IntervalActions()
        return make_constant_env(space, spec.value, noise_rng)
    raise ValueError(f"unknown environment kind {spec.kind!r}")


def _indicator_expert(arm: int, context: Context, action: Action) -> float:
    return 0.0 if action.index == arm else 1.0


def _distance_expert(center: float, context: Context, action: Action) -> float:
    return min(1.0, abs(action.value - center))


def build_oracle(config: ExperimentConfig, env: Environment) -> RegressionOracle:
    """Fresh oracle instance matched to the environment's action space."""
    space = env.space
    if config.oracle == "tabular":
        return TabularOracle(space.count)
    if config.oracle == "aggregation":
        if isinstance(space, FiniteActions):
            experts = [functools.partial(_indicator_expert, k + 1) for k in range(space.count)]
        else:
            count = config.oracle_settings.expert_count
            centers = np.linspace(0.0, 1.0, count)
            experts = [functools.partial(_distance_expert, float(c)) for c in centers]
        return AggregationOracle(experts)
    dim = getattr(env, "context_dim", 0)
    return ParametricOracle(
        dim,
        step_size=config.oracle_settings.step_size,
        decay=config.oracle_settings.step_decay,
    )


def _resolve_regsq(config: ExperimentConfig, env: Environment) -> float:
    if config.run.regsq_estimate is not None:
        return config.run.regsq_estimate
    return default_regsq_estimate(build_oracle(config, env), config.run.horizon)


# -- baselines ---------------------------------------------------------------


def run_epsilon_greedy(
    oracle: RegressionOracle,
    environment: Environment,
    T: int,
    rng: np.random.Generator,
    epsilon: float = 1.0,
) -> List[RoundLog]:
    """Explore uniformly with probability min(1, epsilon * t^(-1/3)), else play greedy."""
    space = environment.space
    logs: List[RoundLog] = []
    for t in range(1, T + 1):
        context = environment.next_context()
        eps = min(1.0, epsilon * t ** (-1.0 / 3.0))
        if rng.random() < eps:
            action = space.sample(rng)
        else:
            action = oracle.argmin_action(context, space)
        loss = validate_loss(environment.realize_loss(context, action), "loss")
        oracle.update(WeightedExample(weight=1.0, context=context, action=action, loss=loss))
        logs.append(
            RoundLog(
                t=t,
                action=action,
                realized_loss=loss,
                mean_loss=environment.mean_loss(context, action),
                context=context,
            )
        )
    return logs


def run_uniform(environment: Environment, T: int, rng: np.random.Generator) -> List[RoundLog]:
    """Play the base measure every round (no learning)."""
    space = environment.space
    logs: List[RoundLog] = []
    for t in range(1, T + 1):
        context = environment.next_context()
        action = space.sample(rng)
        loss = validate_loss(environment.realize_loss(context, action), "loss")
        logs.append(
            RoundLog(
                t=t,
                action=action,
                realized_loss=loss,
                mean_loss=environment.mean_loss(context, action),
                context=context,
            )
        )
    return logs


# -- annotation and serialization --------------------------------------------


def annotate_benchmarks(logs: Sequence[RoundLog], env: Environment, metric: Metric) -> None:
    """Fill each log's benchmark with the metric's per-context benchmark value."""
    if metric.name == "smooth_regret":
        fn: Callable[[Context], float] = lambda x: env.smooth_benchmark(x, metric.h)
    elif metric.name == "standard_regret":
        fn = env.best_mean
    else:
        fn = lambda x: 0.0
    for log in logs:
        log.benchmark = fn(log.context)


def _fmt(value: float) -> str:
    return repr(float(value))


@dataclass
class ReplicateTables:
    """Rendered per-replicate CSV bodies plus the final cumulative values."""

    rounds: List[str]
    realized: List[str]
    final_smooth: Optional[float]
    final_standard: float


def render_replicate_tables(
    logs: Sequence[RoundLog], env: Environment, smoothing: Optional[SmoothingCap]
) -> ReplicateTables:
    """Per-round CSV rows with running smooth/standard regret columns.

    The smooth column stays empty when the config carries no smoothing level
    (same convention as the empty base_index outside CORRAL runs). A second
    table tracks the same curves against realized losses plus the running
    progressive loss.
    """
    lines = [ROUNDS_HEADER]
    realized_lines = [REALIZED_HEADER]
    cum_smooth = 0.0
    cum_standard = 0.0
    cum_smooth_rl = 0.0
    cum_standard_rl = 0.0
    cum_loss = 0.0
    for log in logs:
        action = log.action
        action_str = str(action.index) if isinstance(action, DiscreteAction) else _fmt(action.value)
        base_str = "" if log.base_index is None else str(log.base_index)
        best = env.best_mean(log.context)
        smooth_str = ""
        smooth_rl_str = ""
        if smoothing is not None:
            smooth_bench = env.smooth_benchmark(log.context, smoothing)
            cum_smooth += log.mean_loss - smooth_bench
            cum_smooth_rl += log.realized_loss - smooth_bench
            smooth_str = _fmt(cum_smooth)
            smooth_rl_str = _fmt(cum_smooth_rl)
        cum_standard += log.mean_loss - best
        cum_standard_rl += log.realized_loss - best
        cum_loss += log.realized_loss
        lines.append(
            ",".join(
                [
                    str(log.t),
                    base_str,
                    action_str,
                    _fmt(log.realized_loss),
                    _fmt(log.mean_loss),
                    _fmt(log.benchmark),
                    smooth_str,
                    _fmt(cum_standard),
                ]
            )
        )
        realized_lines.append(
            ",".join(
                [
                    str(log.t),
                    smooth_rl_str,
                    _fmt(cum_standard_rl),
                    _fmt(cum_loss / log.t),
                ]
            )
        )
    return ReplicateTables(
        rounds=lines,
        realized=realized_lines,
        final_smooth=cum_smooth if smoothing is not None else None,
        final_standard=cum_standard,
    )


@dataclass
class ExperimentResult:
    config_hash: str
    output_dir: Path
    round_files: List[Path]
    summary_file: Path
    manifest_file: Path
    summaries: List[dict]


def run_replicate(config: ExperimentConfig, seed: int, output_dir: Path) -> dict:
    """Run one seeded replicate, write its rounds CSV, return the summary row."""
    run = config.run
    T = run.horizon
    env = build_environment(config, seed)
    regsq = _resolve_regsq(config, env)

    if config.learner == "smooth_igw":
        h = config.effective_h()
        gamma = run.gamma_override or gamma_for_horizon(T, h, regsq)
        learner = SmoothIgwLearner(
            build_oracle(config, env), env.space, h, gamma, seeded_rng(seed, "policy")
        )
        logs = run_smooth_igw(learner, env, T)
    elif config.learner == "corral":
        cs = config.corral_settings
        if cs.grid == "gamma_h":
            products = gamma_h_grid(cs.gamma_h_lo, cs.gamma_h_hi, cs.gamma_h_count)
            logs = run_adaptive(
                env.space,
                lambda: build_oracle(config, env),
                env,
                T,
                run.corral_eta,
                seed,
                gamma_h_values=products,
                regsq=regsq,
            )
        else:
            logs = run_adaptive(
                env.space,
                lambda: build_oracle(config, env),
                env,
                T,
                run.corral_eta,
                seed,
                regsq=regsq,
                base_count=run.base_count_override,
            )
    elif config.learner == "epsilon_greedy_baseline":
        logs = run_epsilon_greedy(
            build_oracle(config, env), env, T, seeded_rng(seed, "policy"), config.epsilon
        )
    else:
        logs = run_uniform(env, T, seeded_rng(seed, "policy"))

    annotate_benchmarks(logs, env, config.metric)
    tables = render_replicate_tables(logs, env, config.effective_h())
    rounds_path = output_dir / f"rounds_seed{seed}.csv"
    rounds_path.write_text("\n".join(tables.rounds) + "\n", encoding="utf-8")
    realized_path = output_dir / f"rounds_seed{seed}_realized.csv"
    realized_path.write_text("\n".join(tables.realized) + "\n", encoding="utf-8")

    realized = np.array([log.realized_loss for log in logs])
    ci_lo, ci_hi = bootstrap_ci(realized, 0.95, 1000, seeded_rng(seed, "bootstrap"))
    return {
        "config_hash": config_hash(config),
        "seed": seed,
        "T": T,
        "final_smooth_regret": "" if tables.final_smooth is None else _fmt(tables.final_smooth),
        "final_standard_regret": _fmt(tables.final_standard),
        "final_progressive_loss": _fmt(float(realized.mean())),
        "ci_lo": _fmt(ci_lo),
        "ci_hi": _fmt(ci_hi),
    }


def _replicate_job(config_json: str, seed: int, output_dir: str) -> dict:
    config = ExperimentConfig.model_validate_json(config_json)
    return run_replicate(config, seed, Path(output_dir))


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run all replicates and write rounds CSVs, summary.csv, and manifest.json."""
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    seeds = [config.run.seed + r for r in range(config.replicates)]

    if config.workers > 1 and config.replicates > 1:
        payload = config.model_dump_json()
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_replicate_job, payload, s, str(output_dir)) for s in seeds]
            summaries = [f.result() for f in futures]
    else:
        summaries = [run_replicate(config, s, output_dir) for s in seeds]

    summary_path = output_dir / "summary.csv"
    rows = [SUMMARY_HEADER]
    for s in summaries:
        rows.append(
            ",".join(str(s[col]) for col in SUMMARY_HEADER.split(","))
        )
    summary_path.write_text("\n".join(rows) + "\n", encoding="utf-8")

    digest = config_hash(config)
    manifest_path = output_dir / "manifest.json"
    round_files = [output_dir / f"rounds_seed{s}.csv" for s in seeds]
    realized_files = [output_dir / f"rounds_seed{s}_realized.csv" for s in seeds]
    manifest = {
        "config_hash": digest,
        "package_version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config": config.model_dump(),
        "files": [p.name for p in round_files + realized_files] + [summary_path.name],
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return ExperimentResult(
        config_hash=digest,
        output_dir=output_dir,
        round_files=round_files,
        summary_file=summary_path,
        manifest_file=manifest_path,
        summaries=summaries,
    )
