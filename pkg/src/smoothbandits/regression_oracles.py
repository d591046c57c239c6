"""Online square-loss regression oracles with weighted updates.

All oracles implement the same protocol:

  * ``predict(context, action)`` -> value in [0,1], pure between updates;
  * ``argmin_action(context, space)`` -> action minimizing the current
    prediction over the space;
  * ``update(WeightedExample)`` -> one online step on the weighted square
    loss ``w * (prediction - loss)^2``;
  * ``save_state()`` / ``load_state()`` -> versioned binary checkpoint with
    exact round-trip.

Three families are provided: per-arm empirical means (finite spaces),
exponential-weights aggregation over a finite expert class, and a
parametric predictor with a closed-form argmin for continuous actions.
"""

from __future__ import annotations

import pickle
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    Action,
    ActionSpace,
    Context,
    ContinuousAction,
    DiscreteAction,
    FiniteActions,
    IntervalActions,
    validate_loss,
)

__all__ = [
    "AggregationOracle",
    "INTERVAL_ARGMIN_GRID",
    "OraclePrediction",
    "ParametricOracle",
    "RegressionOracle",
    "TabularOracle",
    "WeightedExample",
    "default_regsq_estimate",
    "sigmoid",
]

#: Uniform grid resolution used for argmin queries on [0,1] when the oracle
#: has no closed-form minimizer. Ties break toward the smaller grid point.
INTERVAL_ARGMIN_GRID = 1025

_STATE_MAGIC = b"SBOR"
_STATE_VERSION = 1


def sigmoid(z: float) -> float:
    # stable in both tails
    if z >= 0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return e / (1.0 + e)


@dataclass(frozen=True)
class OraclePrediction:
    """Loss estimate clipped into [0,1] (predictors may internally exceed the range)."""

    value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", float(min(1.0, max(0.0, self.value))))


@dataclass(frozen=True)
class WeightedExample:
    """One weighted regression example (w, x, a, loss); w = 0 means a no-op update."""

    weight: float
    context: Context
    action: Action
    loss: float

    def __post_init__(self) -> None:
        if self.weight < 0 or not np.isfinite(self.weight):
            raise ValueError(f"example weight must be nonnegative, got {self.weight!r}")
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "loss", validate_loss(self.loss))


class RegressionOracle:
    """Shared plumbing for the concrete oracles."""

    def predict(self, context: Context, action: Action) -> float:
        raise NotImplementedError

    def update(self, example: WeightedExample) -> None:
        raise NotImplementedError

    def argmin_action(self, context: Context, space: ActionSpace) -> Action:
        """Minimizer of the current estimate; exact scan on finite spaces,
        grid scan on [0,1] unless a subclass has a closed form. Ties break
        to the lowest index / smallest value."""
        if isinstance(space, FiniteActions):
            values = self.predict_arms(context, space)
            return DiscreteAction(int(np.argmin(values)) + 1)
        grid = np.linspace(0.0, 1.0, INTERVAL_ARGMIN_GRID)
        values = [self.predict(context, ContinuousAction(float(a))) for a in grid]
        return ContinuousAction(float(grid[int(np.argmin(values))]))

    def predict_arms(self, context: Context, space: FiniteActions) -> np.ndarray:
        """All-arm predictions on a finite space (vector of length K)."""
        return np.array(
            [self.predict(context, DiscreteAction(i + 1)) for i in range(space.count)]
        )

    def save_state(self) -> bytes:
        """Versioned binary checkpoint; load_state restores it exactly."""
        return _STATE_MAGIC + bytes([_STATE_VERSION]) + pickle.dumps(self.__dict__)

    def load_state(self, blob: bytes) -> None:
        if blob[: len(_STATE_MAGIC)] != _STATE_MAGIC:
            raise ValueError("not an oracle checkpoint")
        version = blob[len(_STATE_MAGIC)]
        if version != _STATE_VERSION:
            raise ValueError(f"unsupported oracle checkpoint version {version}")
        self.__dict__.update(pickle.loads(blob[len(_STATE_MAGIC) + 1 :]))


class TabularOracle(RegressionOracle):
    """Per-arm weighted running mean for finite, context-free problems.

    Each arm starts with one pseudo-observation of loss ``prior_loss`` so
    unvisited arms still predict; prediction is
    ``(weighted loss sum + prior_loss * prior_count) / (weight sum + prior_count)``.
    """

    def __init__(self, arms: int, prior_loss: float = 0.5, prior_count: float = 1.0):
        if arms < 1:
            raise ValueError("need at least one arm")
        self.arms = int(arms)
        self.prior_loss = float(prior_loss)
        self.prior_count = float(prior_count)
        self.sums = np.zeros(self.arms)
        self.counts = np.zeros(self.arms)
        # maintained so argmin is a single argmin over a cached vector
        self._preds = np.full(self.arms, prior_loss if prior_count > 0 else 0.5)

    def _arm(self, action: Action) -> int:
        if not isinstance(action, DiscreteAction):
            raise TypeError("tabular oracle only handles discrete actions")
        if action.index > self.arms:
            raise ValueError(f"arm index {action.index} exceeds arm count {self.arms}")
        return action.index - 1

    def predict(self, context: Context, action: Action) -> float:
        return float(min(1.0, max(0.0, self._preds[self._arm(action)])))

    def predict_arms(self, context: Context, space: FiniteActions) -> np.ndarray:
        if space.count != self.arms:
            raise ValueError(f"space has {space.count} arms, oracle has {self.arms}")
        return np.clip(self._preds, 0.0, 1.0)

    def argmin_action(self, context: Context, space: ActionSpace) -> Action:
        if not isinstance(space, FiniteActions):
            raise TypeError("tabular oracle only handles finite spaces")
        if space.count != self.arms:
            raise ValueError(f"space has {space.count} arms, oracle has {self.arms}")
        return DiscreteAction(int(np.argmin(self._preds)) + 1)

    def update(self, example: WeightedExample) -> None:
        if example.weight == 0.0:
            return
        k = self._arm(example.action)
        self.sums[k] += example.weight * example.loss
        self.counts[k] += example.weight
        self._preds[k] = (self.sums[k] + self.prior_loss * self.prior_count) / (
            self.counts[k] + self.prior_count
        )


class AggregationOracle(RegressionOracle):
    """Exponential-weights aggregation of a finite expert class under square loss.

    Maintains log-weights over experts, downdated by ``eta * w * (expert - loss)^2``.
    Predictions use the square-loss substitution function at the mixable
    rate ``eta = 2`` for outcomes in [0,1]:

        G(y) = -(1/eta) * log sum_f wbar_f * exp(-eta * (f(x,a) - y)^2)
        p    = 1/2 - (G(1) - G(0)) / 2

    which guarantees cumulative square-loss regret at most ``log(|F|) / eta``
    against the best expert on any sequence. Checkpointing pickles the
    experts, so they must be module-level callables or partials over them.
    """

    def __init__(
        self,
        experts: Optional[Sequence[Callable[[Context, Action], float]]] = None,
        eta: float = 2.0,
        batch_evaluator: Optional[Callable[[Context, Action], np.ndarray]] = None,
        expert_count: Optional[int] = None,
    ):
        if experts is None and batch_evaluator is None:
            raise ValueError("need at least one expert")
        if experts is not None:
            if len(experts) == 0:
                raise ValueError("need at least one expert")
            self.experts = list(experts)
            self.count = len(self.experts)
            self._evaluator = None
        else:
            if expert_count is None or expert_count < 1:
                raise ValueError("batch_evaluator requires a positive expert_count")
            self.experts = None
            self.count = int(expert_count)
            self._evaluator = batch_evaluator
        if eta <= 0:
            raise ValueError("eta must be positive")
        self.eta = float(eta)
        self.log_weights = np.zeros(self.count)

    @classmethod
    def from_batch_evaluator(
        cls, evaluator: Callable[[Context, Action], np.ndarray], count: int, eta: float = 2.0
    ) -> "AggregationOracle":
        """Expert class given as one vectorized call returning all expert values."""
        return cls(batch_evaluator=evaluator, expert_count=count, eta=eta)

    def expert_values(self, context: Context, action: Action) -> np.ndarray:
        if self._evaluator is not None:
            values = np.asarray(self._evaluator(context, action), dtype=float)
            if values.shape != (self.count,):
                raise ValueError(f"batch evaluator must return {self.count} values")
            return values
        return np.array([f(context, action) for f in self.experts])

    def posterior(self) -> np.ndarray:
        """Normalized expert weights."""
        w = np.exp(self.log_weights - self.log_weights.max())
        return w / w.sum()

    def generalized_loss(self, values: np.ndarray, y: float) -> float:
        """G(y) = -(1/eta) log sum_f wbar_f exp(-eta (f - y)^2)."""
        scores = self.log_weights - self.eta * (values - y) ** 2
        m = scores.max()
        lse = m + np.log(np.exp(scores - m).sum())
        norm = self.log_weights.max()
        lse_norm = norm + np.log(np.exp(self.log_weights - norm).sum())
        return float(-(lse - lse_norm) / self.eta)

    def predict(self, context: Context, action: Action) -> float:
        values = self.expert_values(context, action)
        # p = 1/2 - (G(1) - G(0))/2; the weight normalizers cancel between
        # the two generalized losses, so work with raw log-sum-exps
        s1 = self.log_weights - self.eta * (values - 1.0) ** 2
        s0 = self.log_weights - self.eta * values**2
        m1 = s1.max()
        m0 = s0.max()
        lse1 = m1 + np.log(np.exp(s1 - m1).sum())
        lse0 = m0 + np.log(np.exp(s0 - m0).sum())
        p = 0.5 + (lse1 - lse0) / (2.0 * self.eta)
        return float(min(1.0, max(0.0, p)))

    def update(self, example: WeightedExample) -> None:
        if example.weight == 0.0:
            return
        values = self.expert_values(example.context, example.action)
        self.log_weights = self.log_weights - self.eta * example.weight * (values - example.loss) ** 2
        # log-sum-exp renormalization keeps the weights finite indefinitely
        m = self.log_weights.max()
        self.log_weights -= m + np.log(np.exp(self.log_weights - m).sum())


def aggregation_mixture_predict(oracle: AggregationOracle, context: Context, action: Action) -> float:
    """Substitution-function prediction of the aggregation oracle (same as ``predict``)."""
    return oracle.predict(context, action)


class ParametricOracle(RegressionOracle):
    """Loss predictor on [0,1] with a learned argmin, for continuous actions.

    Model: ``f(x, a) = sigmoid(|w| * |ahat(x) - a| + xi)`` with
    ``ahat(x) = sigmoid(v . x)``; the minimizer over actions is ``ahat(x)``
    by construction, so argmin queries are closed-form. Updates are online
    (sub)gradient steps on the weighted square loss with an inverse-square-root
    step-size decay; the |.| kinks use subgradient 0.
    """

    def __init__(
        self,
        dim: int,
        step_size: float = 0.05,
        decay: bool = True,
        init_w: float = 1.0,
        init_xi: float = 0.0,
    ):
        if dim < 0:
            raise ValueError("feature dimension must be nonnegative")
        self.dim = int(dim)
        self.step_size = float(step_size)
        self.decay = bool(decay)
        self.v = np.zeros(self.dim)
        self.w = float(init_w)
        self.xi = float(init_xi)
        self.updates = 0

    def _check(self, context: Context, action: Action) -> float:
        if not isinstance(action, ContinuousAction):
            raise TypeError("parametric oracle only handles continuous actions")
        if context.features.shape != (self.dim,):
            raise ValueError(f"expected {self.dim}-dim features, got {context.features.shape}")
        return action.value

    def greedy_value(self, context: Context) -> float:
        return sigmoid(float(self.v @ context.features)) if self.dim else sigmoid(0.0)

    def predict(self, context: Context, action: Action) -> float:
        a = self._check(context, action)
        z = self.greedy_value(context) - a
        return sigmoid(abs(self.w) * abs(z) + self.xi)

    def argmin_action(self, context: Context, space: ActionSpace) -> Action:
        if not isinstance(space, IntervalActions):
            raise TypeError("parametric oracle only handles interval spaces")
        return ContinuousAction(self.greedy_value(context))

    def gradient(self, example: WeightedExample) -> tuple[np.ndarray, float, float]:
        """Gradient of ``w_t * (f(x,a) - loss)^2`` over (v, w, xi)."""
        a = self._check(example.context, example.action)
        x = example.context.features
        ahat = self.greedy_value(example.context)
        z = ahat - a
        s = abs(self.w) * abs(z) + self.xi
        p = sigmoid(s)
        gate = 2.0 * example.weight * (p - example.loss) * p * (1.0 - p)
        g_xi = gate
        g_w = gate * np.sign(self.w) * abs(z)
        g_v = gate * abs(self.w) * np.sign(z) * ahat * (1.0 - ahat) * x
        return g_v, float(g_w), float(g_xi)

    def update(self, example: WeightedExample) -> None:
        if example.weight == 0.0:
            return
        g_v, g_w, g_xi = self.gradient(example)
        self.updates += 1
        step = self.step_size / np.sqrt(self.updates) if self.decay else self.step_size
        self.v -= step * g_v
        self.w -= step * g_w
        self.xi -= step * g_xi


def parametric_gradient(
    oracle: ParametricOracle, example: WeightedExample
) -> tuple[np.ndarray, float, float]:
    """Analytic gradient of the weighted square loss at the oracle's current parameters."""
    return oracle.gradient(example)


def default_regsq_estimate(oracle: RegressionOracle, horizon: int) -> float:
    """RegSq(T) estimate fed to the exploration schedules.

    log|F| for aggregation, log(K*T) for tabular; parametric oracles have no
    canonical value and callers should supply their own.
    """
    if isinstance(oracle, AggregationOracle):
        return max(float(np.log(oracle.count)), 1e-12)
    if isinstance(oracle, TabularOracle):
        return float(np.log(oracle.arms * max(horizon, 2)))
    return 1.0
