"""Self-check suites exposed through the CLI/service `bench` command.

Fast versions of the statistical guarantees the library rests on: sampler
fidelity against the exact finite law, the exploration-vs-estimation
certificate, and a regret run against its theoretical envelope. The full,
slower versions live in the acceptance test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import EMPTY_CONTEXT, FiniteActions, SmoothingCap, seeded_rng
from ..environments import MultipleBestArmsSpec, make_multiple_best_arms
from ..regression_oracles import RegressionOracle, TabularOracle
from ..sampling import IgwParams, exact_finite_distribution, rejection_sample_batch
from ..smooth_igw import SmoothIgwLearner, gamma_for_horizon, run as run_smooth_igw
from .stats import Metric, compute_regret_curve
from .runner import annotate_benchmarks

__all__ = ["BenchResult", "FrozenFiniteOracle", "bench_dec", "bench_sampling", "bench_regret", "run_bench", "sample_capped_kernel"]


@dataclass
class BenchResult:
    suite: str
    passed: bool
    metrics: dict = field(default_factory=dict)


class FrozenFiniteOracle(RegressionOracle):
    """Fixed prediction vector over arms; updates are no-ops (check machinery)."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)

    def predict(self, context, action):
        return float(self.values[action.index - 1])

    def predict_arms(self, context, space):
        return self.values

    def update(self, example):
        pass


def sample_capped_kernel(
    K: int, h: SmoothingCap, rng: np.random.Generator, max_tries: int = 1000
) -> np.ndarray:
    """Random kernel with density cap 1/h on K uniform arms, i.e. a point of the
    simplex with every coordinate at most 1/(h*K), by rejection from the
    uniform simplex. Raises when the cap makes acceptance too rare."""
    cap = 1.0 / (h.h * K)
    if cap < 1.0 / K:
        raise ValueError("cap below 1/K admits no kernel")
    for _ in range(max_tries):
        q = rng.dirichlet(np.ones(K))
        if np.all(q <= cap):
            return q
    raise RuntimeError(f"no capped kernel found in {max_tries} tries (K={K}, h={h.h})")


def _random_igw_instance(rng: np.random.Generator, K: int, h: float, gamma: float):
    values = np.round(rng.random(K), 6)
    oracle = FrozenFiniteOracle(values)
    space = FiniteActions(K)
    greedy = oracle.argmin_action(EMPTY_CONTEXT, space)
    params = IgwParams(
        h=SmoothingCap(h), gamma=gamma, greedy_action=greedy,
        greedy_value=oracle.predict(EMPTY_CONTEXT, greedy),
    )
    return oracle, space, params


def bench_sampling(instances: int = 5, draws: int = 200_000, seed: int = 0, tol: float = 0.01) -> BenchResult:
    """Total-variation gap between batched rejection draws and the exact law."""
    rng = seeded_rng(seed, "bench-sampling")
    worst = 0.0
    for _ in range(instances):
        K = int(rng.integers(2, 17))
        h = float(rng.choice([1.0 / K, 0.25, 1.0]))
        gamma = float(rng.choice([1.0, 10.0, 100.0]))
        oracle, space, params = _random_igw_instance(rng, K, h, gamma)
        exact = exact_finite_distribution(oracle, EMPTY_CONTEXT, space, params).probabilities
        arms = rejection_sample_batch(oracle, EMPTY_CONTEXT, space, params, rng, draws)
        freq = np.bincount(arms, minlength=K + 1)[1:] / draws
        worst = max(worst, 0.5 * float(np.abs(freq - exact).sum()))
    return BenchResult("sampling", worst <= tol, {"instances": instances, "draws": draws, "max_tv": worst, "tolerance": tol})


def bench_dec(instances: int = 200, seed: int = 0, slack: float = 1e-9) -> BenchResult:
    """Brute-force certificate: decision regret minus scaled estimation error
    stays below 2/(h*gamma) for random truths and random capped kernels."""
    rng = seeded_rng(seed, "bench-dec")
    worst_excess = -np.inf
    for _ in range(instances):
        K = int(rng.integers(2, 9))
        h = float(rng.uniform(0.05, 0.5))
        gamma = float(np.exp(rng.uniform(np.log(0.5), np.log(200.0))))
        oracle, space, params = _random_igw_instance(rng, K, h, gamma)
        P = exact_finite_distribution(oracle, EMPTY_CONTEXT, space, params).probabilities
        f_true = rng.random(K)
        cap = SmoothingCap(h)
        try:
            Q = sample_capped_kernel(K, cap, rng, max_tries=200)
        except RuntimeError:
            Q = np.full(K, 1.0 / K)
        fhat = oracle.values
        lhs = float(P @ f_true - Q @ f_true - (gamma / 4.0) * (P @ (fhat - f_true) ** 2))
        worst_excess = max(worst_excess, lhs - 2.0 / (h * gamma))
    return BenchResult("dec", worst_excess <= slack, {"instances": instances, "worst_excess": worst_excess, "slack": slack})


def bench_regret(seed: int = 0, T: int = 4096) -> BenchResult:
    """Small multiple-best-arms run against the theoretical envelope."""
    K, K_star = 64, 8
    h = SmoothingCap(K_star / K)
    spec = MultipleBestArmsSpec(arms=K, optimal_arms=K_star, optimal_mean=0.0, suboptimal_mean=0.5)
    regsq = float(np.log(K * T))
    finals = []
    for s in range(2):
        env = make_multiple_best_arms(spec, seeded_rng(seed + s, "env-init"))
        env.rng = seeded_rng(seed + s, "env")
        oracle = TabularOracle(K)
        learner = SmoothIgwLearner(oracle, env.space, h, gamma_for_horizon(T, h, regsq), seeded_rng(seed + s, "policy"))
        logs = run_smooth_igw(learner, env, T)
        annotate_benchmarks(logs, env, Metric("smooth_regret", h))
        finals.append(compute_regret_curve(logs, Metric("smooth_regret", h)).final())
    envelope = 8.0 * float(np.sqrt(4.0 * T * regsq / h.h))
    mean_final = float(np.mean(finals))
    return BenchResult(
        "regret",
        0.0 <= mean_final <= envelope,
        {"T": T, "mean_final_smooth_regret": mean_final, "envelope": envelope},
    )


def run_bench(suite: str, seed: int = 0) -> BenchResult:
    if suite == "sampling":
        return bench_sampling(seed=seed)
    if suite == "dec":
        return bench_dec(seed=seed)
    if suite == "regret":
        return bench_regret(seed=seed)
    raise ValueError(f"unknown bench suite {suite!r}")
