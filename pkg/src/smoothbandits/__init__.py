"""Contextual bandits over large and continuous action spaces.

Exploration follows a smoothed inverse-gap-weighting law sampled in O(1) by
rejection, regression is delegated to pluggable online square-loss oracles,
and a CORRAL master adapts to unknown smoothness. The package ships
synthetic and CSV-backed environments, an experiment harness with exact
benchmark accounting, an HTTP service, and a CLI.
"""

__version__ = "0.1.0"

from .core import (
    Action,
    ActionSpace,
    ContinuousAction,
    Context,
    DiscreteAction,
    FiniteActions,
    IntervalActions,
    RoundLog,
    RunConfig,
    SmoothingCap,
    load_run_config,
    seeded_rng,
)

__all__ = [
    "Action",
    "ActionSpace",
    "ContinuousAction",
    "Context",
    "DiscreteAction",
    "FiniteActions",
    "IntervalActions",
    "RoundLog",
    "RunConfig",
    "SmoothingCap",
    "__version__",
    "load_run_config",
    "seeded_rng",
]
