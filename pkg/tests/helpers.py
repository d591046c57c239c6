"""Shared test machinery: frozen oracles, independent brute-force checks."""

from __future__ import annotations

import numpy as np

from smoothbandits.core import SmoothingCap
from smoothbandits.regression_oracles import RegressionOracle


class FrozenOracle(RegressionOracle):
    """Fixed per-arm prediction vector; updates are no-ops."""

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)

    def predict(self, context, action):
        return float(self.values[action.index - 1])

    def predict_arms(self, context, space):
        return self.values

    def update(self, example):
        pass


class CountingOracle(RegressionOracle):
    """Wraps an oracle and counts predict/update calls; records update weights."""

    def __init__(self, inner: RegressionOracle):
        self.inner = inner
        self.predict_calls = 0
        self.update_calls = 0
        self.update_weights: list[float] = []

    def predict(self, context, action):
        self.predict_calls += 1
        return self.inner.predict(context, action)

    def predict_arms(self, context, space):
        return self.inner.predict_arms(context, space)

    def argmin_action(self, context, space):
        return self.inner.argmin_action(context, space)

    def update(self, example):
        self.update_calls += 1
        self.update_weights.append(example.weight)
        self.inner.update(example)


class CountingRng:
    """Duck-typed rng that counts scalar draws, for cost-model checks."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.integer_draws = 0
        self.uniform_draws = 0

    def integers(self, *args, **kwargs):
        self.integer_draws += 1
        return self.rng.integers(*args, **kwargs)

    def random(self, *args, **kwargs):
        self.uniform_draws += 1
        return self.rng.random(*args, **kwargs)


def lp_smooth_benchmark(means, h: SmoothingCap) -> float:
    """Brute-force LP over the capped simplex (independent of water-filling)."""
    from scipy.optimize import linprog

    means = np.asarray(means, dtype=float)
    K = means.size
    cap = min(1.0, 1.0 / (h.h * K))
    result = linprog(
        means,
        A_eq=np.ones((1, K)),
        b_eq=[1.0],
        bounds=[(0.0, cap)] * K,
        method="highs",
    )
    assert result.success, result.message
    return float(result.fun)


def sample_capped_simplex(K: int, h: SmoothingCap, rng: np.random.Generator, max_tries: int = 200):
    """Uniform-simplex rejection onto the cap 1/(h*K); None when too rare."""
    cap = 1.0 / (h.h * K)
    for _ in range(max_tries):
        q = rng.dirichlet(np.ones(K))
        if np.all(q <= cap):
            return q
    return None


def empirical_tv(counts: np.ndarray, probs: np.ndarray) -> float:
    freq = counts / counts.sum()
    return 0.5 * float(np.abs(freq - probs).sum())
