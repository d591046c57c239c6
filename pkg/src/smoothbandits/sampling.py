"""Smoothed inverse-gap-weighted exploration and its O(1) rejection sampler.

The exploration density over the base measure is

    m(a) = 1 / (1 + h * gamma * (fhat(x,a) - fhat(x, ahat)))  in (0, 1],

where ``ahat`` is the greedy action. Integrating m against the base measure
gives a sub-probability measure M; the played law mixes M with a point mass
of the leftover probability ``1 - M(A)`` at the greedy action. Sampling
needs one base-measure draw and one Bernoulli accept/reject, never the
materialized law; ``exact_finite_distribution`` materializes it on finite
spaces as the test oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Action,
    ActionSpace,
    Context,
    ContinuousAction,
    DiscreteAction,
    FiniteActions,
    SmoothingCap,
    check_action_in_space,
)
from .regression_oracles import RegressionOracle

__all__ = [
    "FiniteDistribution",
    "GAP_TOLERANCE",
    "IgwParams",
    "exact_finite_distribution",
    "igw_density",
    "make_igw_params",
    "rejection_sample",
    "rejection_sample_batch",
    "submeasure_total",
]

#: Estimated gaps below -GAP_TOLERANCE signal a broken argmin; gaps in
#: (-GAP_TOLERANCE, 0) are grid/rounding noise and clamp to 0 so the
#: acceptance probability stays in (0, 1].
GAP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class IgwParams:
    """Frozen per-round exploration parameters: smoothing, rate, and the greedy anchor."""

    h: SmoothingCap
    gamma: float
    greedy_action: Action
    greedy_value: float

    def __post_init__(self) -> None:
        if self.gamma <= 0 or not np.isfinite(self.gamma):
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")


@dataclass(frozen=True)
class FiniteDistribution:
    """Explicit played law on a finite space; sums to 1 within 1e-12."""

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a nonempty vector")
        if np.any(p < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probabilities", p)


def make_igw_params(
    oracle: RegressionOracle,
    context: Context,
    space: ActionSpace,
    h: SmoothingCap,
    gamma: float,
) -> IgwParams:
    """Query the greedy action and anchor value from the oracle's current estimate."""
    greedy = oracle.argmin_action(context, space)
    return IgwParams(h=h, gamma=gamma, greedy_action=greedy, greedy_value=oracle.predict(context, greedy))


def igw_density(params: IgwParams, predicted: float) -> float:
    """Acceptance probability m = 1/(1 + h*gamma*gap) for one predicted loss."""
    gap = predicted - params.greedy_value
    if gap < -GAP_TOLERANCE:
        raise ValueError(
            f"predicted loss {predicted!r} undercuts the greedy value "
            f"{params.greedy_value!r}; argmin is broken"
        )
    if gap < 0.0:
        gap = 0.0
    return 1.0 / (1.0 + params.h.h * params.gamma * gap)


def rejection_sample(
    oracle: RegressionOracle,
    context: Context,
    space: ActionSpace,
    params: IgwParams,
    rng: np.random.Generator,
) -> Action:
    """One draw from the smoothed-IGW law.

    Exactly one base-measure draw and one oracle prediction per call (the
    greedy value is already on ``params``): draw a ~ base measure, accept it
    with probability m(a), otherwise fall back to the greedy action.
    """
    proposal = space.sample(rng)
    m = igw_density(params, oracle.predict(context, proposal))
    if rng.random() < m:
        return proposal
    return params.greedy_action


def rejection_sample_batch(
    oracle: RegressionOracle,
    context: Context,
    space: ActionSpace,
    params: IgwParams,
    rng: np.random.Generator,
    n: int,
) -> np.ndarray:
    """Vectorized rejection sampling: n i.i.d. draws from the same law.

    Identical accept/reject construction as ``rejection_sample`` (same
    density, same base measure), batched for Monte Carlo work; returns arm
    indices on finite spaces and action values on the interval.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(space, FiniteActions):
        values = oracle.predict_arms(context, space)
        m = np.array([igw_density(params, float(v)) for v in values])
        proposals = space.sample_many(rng, n)
        accept = rng.random(n) < m[proposals - 1]
        assert isinstance(params.greedy_action, DiscreteAction)
        return np.where(accept, proposals, params.greedy_action.index)
    proposals = space.sample_many(rng, n)
    m = np.array(
        [igw_density(params, oracle.predict(context, ContinuousAction(float(a)))) for a in proposals]
    )
    accept = rng.random(n) < m
    assert isinstance(params.greedy_action, ContinuousAction)
    return np.where(accept, proposals, params.greedy_action.value)


def _finite_densities(
    oracle: RegressionOracle, context: Context, space: FiniteActions, params: IgwParams
) -> np.ndarray:
    check_action_in_space(params.greedy_action, space)
    values = oracle.predict_arms(context, space)
    return np.array([igw_density(params, float(v)) for v in values])


def submeasure_total(
    oracle: RegressionOracle, context: Context, space: FiniteActions, params: IgwParams
) -> float:
    """M(A): total accepted mass, the average of m over the uniform base measure."""
    return float(_finite_densities(oracle, context, space, params).mean())


def exact_finite_distribution(
    oracle: RegressionOracle, context: Context, space: FiniteActions, params: IgwParams
) -> FiniteDistribution:
    """Materialize the played law on a finite space (test oracle for the sampler).

    P(a) = m(a)/K for every arm, plus the leftover mass 1 - M(A) on the
    greedy arm.
    """
    m = _finite_densities(oracle, context, space, params)
    probs = m / space.count
    assert isinstance(params.greedy_action, DiscreteAction)
    probs[params.greedy_action.index - 1] += 1.0 - probs.sum()
    return FiniteDistribution(probs)
