"""Ground-truth environments and the smoothed-benchmark oracle.

An environment owns the conditional mean loss (the truth the learner never
sees), a context stream, and a single-owner noise stream. The smoothed
benchmark at level h is the cheapest loss achievable by any action
distribution whose density w.r.t. the base measure is capped at 1/h; on
finite spaces that optimum is the water-filling solution (fill the cap on
the lowest-mean arms), and interval problems are discretized onto a grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import (
    Action,
    ActionSpace,
    Context,
    ContinuousAction,
    DiscreteAction,
    EMPTY_CONTEXT,
    FiniteActions,
    IntervalActions,
    SmoothingCap,
    validate_loss,
)

__all__ = [
    "DEFAULT_BENCHMARK_GRID",
    "Environment",
    "HolderSpec",
    "MultipleBestArmsSpec",
    "RffMap",
    "load_arm_dataset",
    "load_regression_dataset",
    "make_constant_env",
    "make_holder_env",
    "make_multiple_best_arms",
    "smooth_benchmark_finite",
    "smooth_benchmark_interval",
]

#: Grid resolution for benchmark values on [0,1]; the discretization error is
#: O(L * spacing^alpha) for Holder-continuous truths.
DEFAULT_BENCHMARK_GRID = 4096


def smooth_benchmark_finite(means: Sequence[float], h: SmoothingCap) -> float:
    """Optimal capped-density loss on a finite space, by water-filling.

    Per-arm probability is capped at c = min(1, 1/(h*K)); the optimum puts
    the cap on the floor(1/c) smallest means and the remainder on the next.
    h = 1 forces the base measure (plain average); h <= 1/K allows a point
    mass (the minimum).
    """
    means = np.asarray(means, dtype=float)
    if means.ndim != 1 or means.size == 0:
        raise ValueError("means must be a nonempty vector")
    if np.any(means < 0) or np.any(means > 1):
        raise ValueError("means must lie in [0,1]")
    K = means.size
    cap = min(1.0, 1.0 / (h.h * K))
    ordered = np.sort(means)
    full = int(np.floor(1.0 / cap))
    value = cap * ordered[:full].sum()
    remainder = 1.0 - full * cap
    if remainder > 1e-15 and full < K:
        value += remainder * ordered[full]
    return float(value)


def smooth_benchmark_interval(
    mean_fn: Callable[[Context, float], float],
    context: Context,
    h: SmoothingCap,
    grid_size: int = DEFAULT_BENCHMARK_GRID,
) -> float:
    """Grid approximation of the capped-density benchmark on [0,1].

    Evaluates the mean loss on a uniform midpoint grid and water-fills with
    the induced per-point cap 1/(h*grid_size).
    """
    if grid_size < int(np.ceil(2.0 / h.h)):
        raise ValueError(f"grid_size must be at least ceil(2/h) = {int(np.ceil(2.0 / h.h))}")
    grid = (np.arange(grid_size) + 0.5) / grid_size
    values = np.array([mean_fn(context, float(a)) for a in grid])
    return smooth_benchmark_finite(values, h)


class Environment:
    """A stochastic contextual bandit problem with known conditional means.

    Mean evaluations are pure; only ``realize_loss`` and the context stream
    consume the environment's noise rng. Replicas should be rebuilt with
    distinct streams rather than shared.
    """

    def __init__(
        self,
        space: ActionSpace,
        rng: Optional[np.random.Generator] = None,
        *,
        means: Optional[np.ndarray] = None,
        mean_fn: Optional[Callable[[Context, float], float]] = None,
        best: Optional[Callable[[Context], float]] = None,
        noise: str = "none",
        noise_half_width: float = 0.05,
        context_fn: Optional[Callable[["Environment"], Context]] = None,
        context_dim: int = 0,
        name: str = "",
    ):
        if noise not in ("none", "bernoulli", "uniform"):
            raise ValueError(f"unknown noise kind {noise!r}")
        if isinstance(space, FiniteActions):
            if means is None:
                raise ValueError("finite environments need a means vector")
            means = np.asarray(means, dtype=float)
            if means.shape != (space.count,):
                raise ValueError(f"means must have length {space.count}")
            if np.any(means < 0) or np.any(means > 1):
                raise ValueError("mean losses must lie in [0,1]")
        else:
            if mean_fn is None:
                raise ValueError("interval environments need a mean_fn")
        self.space = space
        self.rng = rng
        self.means = means
        self._mean_fn = mean_fn
        self._best = best
        self.noise = noise
        self.noise_half_width = float(noise_half_width)
        self._context_fn = context_fn
        self.name = name
        self.context_dim = context_dim
        self._round = 0
        self._smooth_cache: dict[float, float] = {}

    # -- context stream -------------------------------------------------

    @property
    def context_free(self) -> bool:
        return self._context_fn is None

    def next_context(self) -> Context:
        self._round += 1
        if self._context_fn is None:
            return EMPTY_CONTEXT
        return self._context_fn(self)

    # -- truth ------------------------------------------------------------

    def mean_loss(self, context: Context, action: Action) -> float:
        if isinstance(self.space, FiniteActions):
            assert isinstance(action, DiscreteAction)
            if self._mean_fn is not None:
                return float(self._mean_fn(context, action.index))
            return float(self.means[action.index - 1])
        assert isinstance(action, ContinuousAction)
        return float(self._mean_fn(context, action.value))

    def arm_means(self, context: Context) -> np.ndarray:
        if not isinstance(self.space, FiniteActions):
            raise TypeError("arm_means only exists on finite spaces")
        if self._mean_fn is not None:
            return np.array([self._mean_fn(context, k + 1) for k in range(self.space.count)])
        return self.means

    def best_mean(self, context: Context) -> float:
        """Smallest conditional mean (the standard-regret benchmark)."""
        if self._best is not None:
            return float(self._best(context))
        if isinstance(self.space, FiniteActions):
            return float(self.arm_means(context).min())
        grid = (np.arange(DEFAULT_BENCHMARK_GRID) + 0.5) / DEFAULT_BENCHMARK_GRID
        return float(min(self._mean_fn(context, float(a)) for a in grid))

    def smooth_benchmark(
        self, context: Context, h: SmoothingCap, grid_size: int = DEFAULT_BENCHMARK_GRID
    ) -> float:
        """Smoothed benchmark at level h for this context (cached when context-free)."""
        cacheable = self.context_free
        if cacheable and h.h in self._smooth_cache:
            return self._smooth_cache[h.h]
        if isinstance(self.space, FiniteActions):
            value = smooth_benchmark_finite(self.arm_means(context), h)
        else:
            value = smooth_benchmark_interval(self._mean_fn, context, h, grid_size)
        if cacheable:
            self._smooth_cache[h.h] = value
        return value

    # -- feedback ---------------------------------------------------------

    def realize_loss(self, context: Context, action: Action) -> float:
        """One noisy loss draw around the conditional mean."""
        mean = self.mean_loss(context, action)
        if self.noise == "none":
            return mean
        if self.rng is None:
            raise ValueError("environment has no noise rng; construct it with one")
        if self.noise == "bernoulli":
            return float(self.rng.random() < mean)
        # symmetric uniform noise; the half-width shrinks near the range
        # boundary so the conditional mean stays exact and losses stay in [0,1]
        width = min(self.noise_half_width, mean, 1.0 - mean)
        return mean + width * (2.0 * self.rng.random() - 1.0)


@dataclass(frozen=True)
class MultipleBestArmsSpec:
    """Finite problem with K arms of which K_star share the optimal mean."""

    arms: int
    optimal_arms: int
    optimal_mean: float = 0.0
    suboptimal_mean: Union[float, Sequence[float]] = 0.5

    def __post_init__(self) -> None:
        if not (1 <= self.optimal_arms <= self.arms):
            raise ValueError("need 1 <= optimal_arms <= arms")
        sub = np.atleast_1d(np.asarray(self.suboptimal_mean, dtype=float))
        if self.arms > self.optimal_arms:
            if sub.size not in (1, self.arms - self.optimal_arms):
                raise ValueError("suboptimal_mean must be scalar or one value per suboptimal arm")
            if self.optimal_mean >= sub.min():
                raise ValueError("optimal_mean must undercut every suboptimal mean")
        validate_loss(self.optimal_mean, "optimal_mean")
        for v in sub:
            validate_loss(v, "suboptimal_mean")


def make_multiple_best_arms(spec: MultipleBestArmsSpec, rng: np.random.Generator) -> Environment:
    """Bernoulli bandit with the optimal arms at rng-shuffled positions."""
    sub = np.broadcast_to(
        np.atleast_1d(np.asarray(spec.suboptimal_mean, dtype=float)),
        (spec.arms - spec.optimal_arms,),
    )
    means = np.concatenate([np.full(spec.optimal_arms, spec.optimal_mean), sub])
    means = means[rng.permutation(spec.arms)]
    return Environment(
        FiniteActions(spec.arms), rng, means=means, noise="bernoulli", name="multiple_best_arms"
    )


def load_arm_dataset(path: Union[str, Path], rng: Optional[np.random.Generator] = None) -> Environment:
    """Finite Bernoulli environment from a CSV of per-arm ratings.

    Schema: header ``arm_id,rating`` with rating in [0,1]; the mean loss of
    each arm is one minus its rating.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["arm_id", "rating"]:
            raise ValueError(f"{path}: expected header 'arm_id,rating', got {header!r}")
        losses = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                rating = float(row[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: rating {row[1]!r} is not a number") from exc
            if not (0.0 <= rating <= 1.0):
                raise ValueError(f"{path}:{lineno}: rating {rating} outside [0,1]")
            losses.append(1.0 - rating)
    if not losses:
        raise ValueError(f"{path}: no arms")
    return Environment(
        FiniteActions(len(losses)), rng, means=np.array(losses), noise="bernoulli", name=path.stem
    )


@dataclass(frozen=True)
class HolderSpec:
    """Holder-continuous truth on [0,1]: |f(x,a) - f(x,a')| <= L * |a - a'|^alpha."""

    L: float
    alpha: float
    minimizer_fn: Optional[Callable[[Context], float]] = None

    def __post_init__(self) -> None:
        if self.L <= 0:
            raise ValueError("L must be positive")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("alpha must lie in (0,1]")


def make_holder_env(spec: HolderSpec, context_dim: int, rng: np.random.Generator) -> Environment:
    """Interval environment f(x,a) = min(1, L*|a - m(x)|^alpha).

    The minimizer m(x) defaults to sigmoid(v.x) with a random direction v;
    losses carry bounded uniform noise of half-width 0.05.
    """
    if context_dim < 1:
        raise ValueError("context_dim must be positive")
    v = rng.standard_normal(context_dim) * (2.0 / np.sqrt(context_dim))

    def default_minimizer(context: Context) -> float:
        return float(1.0 / (1.0 + np.exp(-v @ context.features)))

    minimizer = spec.minimizer_fn or default_minimizer

    def mean_fn(context: Context, a: float) -> float:
        return min(1.0, spec.L * abs(a - minimizer(context)) ** spec.alpha)

    def context_fn(env: Environment) -> Context:
        return Context(features=env.rng.standard_normal(context_dim))

    return Environment(
        IntervalActions(),
        rng,
        mean_fn=mean_fn,
        best=lambda context: 0.0,
        noise="uniform",
        noise_half_width=0.05,
        context_fn=context_fn,
        context_dim=context_dim,
        name="holder",
    )


class RffMap:
    """Random Fourier features for the Laplace kernel (Cauchy frequencies)."""

    def __init__(self, input_dim: int, features: int, bandwidth: float, rng: np.random.Generator):
        if features < 1 or input_dim < 1:
            raise ValueError("need positive dimensions")
        if bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        self.W = rng.standard_cauchy((features, input_dim)) / bandwidth
        self.b = rng.random(features) * 2.0 * np.pi
        self.scale = np.sqrt(2.0 / features)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return self.scale * np.cos(self.W @ x + self.b)


def load_regression_dataset(
    path: Union[str, Path],
    rng: Optional[np.random.Generator] = None,
    *,
    shuffle: bool = False,
    rff_features: Optional[int] = None,
    rff_bandwidth: float = 1.0,
) -> Environment:
    """Continuous-action environment from a regression CSV.

    Schema: header ``f1,...,fd,target`` with numeric cells. Targets are
    min-max rescaled into [0,1]; playing action a on a row with target y
    deterministically costs |y - a|. Rows are visited in file order (one
    online pass) unless ``shuffle``; contexts are the raw feature rows or,
    when ``rff_features`` is set, their random-Fourier-feature embedding.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ValueError(f"{path}: expected a header with features and a target column")
        width = len(header)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != width:
                raise ValueError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric cell") from exc
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows)
    features, targets = data[:, :-1], data[:, -1]
    span = targets.max() - targets.min()
    if span > 0:
        targets = (targets - targets.min()) / span
    elif not (0.0 <= targets[0] <= 1.0):
        raise ValueError(f"{path}: constant target outside [0,1] cannot be rescaled")

    order = np.arange(len(targets))
    if shuffle:
        if rng is None:
            raise ValueError("shuffling needs an rng")
        order = rng.permutation(len(targets))
    rff = None
    if rff_features is not None:
        if rng is None:
            raise ValueError("random Fourier features need an rng")
        rff = RffMap(features.shape[1], rff_features, rff_bandwidth, rng)

    def context_fn(env: Environment) -> Context:
        row = int(order[(env._round - 1) % len(order)])
        x = features[row]
        if rff is not None:
            x = rff.transform(x)
        return Context(features=x, id=str(row))

    def mean_fn(context: Context, a: float) -> float:
        return abs(float(targets[int(context.id)]) - a)

    return Environment(
        IntervalActions(),
        rng,
        mean_fn=mean_fn,
        best=lambda context: 0.0,
        noise="none",
        context_fn=context_fn,
        context_dim=features.shape[1] if rff is None else rff_features,
        name=path.stem,
    )


def make_constant_env(
    space: ActionSpace, value: float, rng: Optional[np.random.Generator] = None, noise: str = "none"
) -> Environment:
    """Every action costs the same conditional mean (all benchmarks coincide)."""
    validate_loss(value, "constant mean")
    if isinstance(space, FiniteActions):
        return Environment(space, rng, means=np.full(space.count, value), noise=noise, name="constant")
    return Environment(space, rng, mean_fn=lambda context, a: value, noise=noise, name="constant")
