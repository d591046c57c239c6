"""Regret accounting and summary statistics for experiment runs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..core import RoundLog, SmoothingCap

__all__ = [
    "Metric",
    "RegretCurve",
    "bootstrap_ci",
    "compute_regret_curve",
    "default_checkpoints",
    "fit_loglog_slope",
]


@dataclass(frozen=True)
class Metric:
    """What a run is scored against: the smoothed benchmark at level h, the
    best single action, or the plain running loss."""

    name: str
    h: Optional[SmoothingCap] = None

    def __post_init__(self) -> None:
        if self.name not in ("smooth_regret", "standard_regret", "progressive_loss"):
            raise ValueError(f"unknown metric {self.name!r}")
        if self.name == "smooth_regret" and self.h is None:
            raise ValueError("the smooth_regret metric requires a smoothing level h")


@dataclass(frozen=True)
class RegretCurve:
    """Cumulative metric values by round.

    Smooth-regret summands can be negative (the level-1 benchmark is the
    average), so the curve is only guaranteed monotone under standard regret.
    """

    points: np.ndarray  # shape (T, 2): columns t, cumulative value
    metadata: dict = field(default_factory=dict)

    def final(self) -> float:
        return float(self.points[-1, 1]) if len(self.points) else 0.0

    def value_at(self, t: int) -> float:
        idx = int(np.searchsorted(self.points[:, 0], t))
        if idx >= len(self.points) or self.points[idx, 0] != t:
            raise KeyError(f"no round {t} in curve")
        return float(self.points[idx, 1])


def compute_regret_curve(logs: Sequence[RoundLog], metric: Metric, **metadata) -> RegretCurve:
    """Cumulative sum of per-round (conditional mean - benchmark) gaps.

    Uses conditional means rather than realized losses, since the regret is
    an expectation; for progressive_loss the curve is the running sum of
    realized losses instead.
    """
    rows = np.empty((len(logs), 2))
    total = 0.0
    for i, log in enumerate(logs):
        if metric.name == "progressive_loss":
            total += log.realized_loss
        else:
            if log.mean_loss is None or log.benchmark is None:
                raise ValueError(f"round {log.t} is missing mean_loss/benchmark")
            total += log.mean_loss - log.benchmark
        rows[i] = (log.t, total)
    return RegretCurve(points=rows, metadata=dict(metadata))


def bootstrap_ci(
    values: Sequence[float],
    level: float,
    resamples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``values``."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("bootstrap_ci needs a nonempty sample")
    if not (0.0 < level < 1.0):
        raise ValueError("level must lie in (0,1)")
    if resamples < 1000:
        raise ValueError("use at least 1000 bootstrap resamples")
    draws = rng.integers(0, values.size, size=(resamples, values.size))
    means = values[draws].mean(axis=1)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [tail, 1.0 - tail])
    return float(lo), float(hi)


def default_checkpoints(T: int) -> list[int]:
    """Powers of two from T/64 up to T (slope-fit defaults)."""
    points = []
    t = max(1, T // 64)
    while t < T:
        points.append(t)
        t *= 2
    points.append(T)
    return points


def fit_loglog_slope(curve: RegretCurve, checkpoints: Sequence[int]) -> float:
    """Least-squares slope of log(cumulative) against log(t) at the checkpoints."""
    if len(checkpoints) < 3:
        raise ValueError("need at least 3 checkpoints")
    xs, ys = [], []
    for t in checkpoints:
        value = curve.value_at(int(t))
        if value <= 0.0:
            raise ValueError(f"cumulative value at t={t} is {value}; slope needs positives")
        xs.append(np.log(float(t)))
        ys.append(np.log(value))
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)
