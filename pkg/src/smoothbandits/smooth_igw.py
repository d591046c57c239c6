"""Fixed-smoothness learner loop: oracle + smoothed-IGW sampler + rate schedule.

Per round: observe the context, query the oracle's greedy action, draw one
action by rejection sampling, observe that action's loss only, feed the
single (x, a, loss) example back to the oracle with weight 1.
"""

from __future__ import annotations

from typing import Callable, List

import numpy as np

from .core import Action, ActionSpace, Context, RoundLog, SmoothingCap, validate_loss
from .regression_oracles import RegressionOracle, WeightedExample
from .sampling import make_igw_params, rejection_sample

__all__ = ["SmoothIgwLearner", "gamma_for_horizon", "run"]


def gamma_for_horizon(T: int, h: SmoothingCap, regsq: float) -> float:
    """Exploration rate tuned for a known horizon: sqrt(8*T / (h * RegSq(T)))."""
    if T < 1:
        raise ValueError("horizon must be positive")
    if regsq <= 0:
        raise ValueError("regsq must be positive")
    return float(np.sqrt(8.0 * T / (h.h * regsq)))


class SmoothIgwLearner:
    """Smoothed-IGW learner at a fixed smoothness level and fixed gamma."""

    def __init__(
        self,
        oracle: RegressionOracle,
        space: ActionSpace,
        h: SmoothingCap,
        gamma: float,
        rng: np.random.Generator,
    ):
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        self.oracle = oracle
        self.space = space
        self.h = h
        self.gamma = float(gamma)
        self.rng = rng
        self.t = 0

    def step(self, context: Context, loss_callback: Callable[[Action], float]) -> RoundLog:
        """Play one round; exactly one loss observation and one oracle update."""
        self.t += 1
        params = make_igw_params(self.oracle, context, self.space, self.h, self.gamma)
        action = rejection_sample(self.oracle, context, self.space, params, self.rng)
        loss = validate_loss(loss_callback(action), "callback loss")
        self.oracle.update(WeightedExample(weight=1.0, context=context, action=action, loss=loss))
        return RoundLog(t=self.t, action=action, realized_loss=loss)


def run(learner: SmoothIgwLearner, environment, T: int) -> List[RoundLog]:
    """Drive the learner against an environment for T rounds.

    Fills each log's conditional mean loss from the environment truth; the
    benchmark column stays unset (the harness fills it per metric).
    """
    logs: List[RoundLog] = []
    for _ in range(T):
        context = environment.next_context()
        log = learner.step(context, lambda a: environment.realize_loss(context, a))
        log.mean_loss = validate_loss(environment.mean_loss(context, log.action), "mean_loss")
        log.context = context
        logs.append(log)
    return logs
