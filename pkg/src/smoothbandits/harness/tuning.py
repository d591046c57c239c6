"""Parameter recipes tying the smoothed guarantees back to standard regret."""

from __future__ import annotations

from ..core import SmoothingCap

__all__ = ["tune_eta_pareto", "tune_h_holder"]


def tune_h_holder(L: float, alpha: float, T: int, regsq: float) -> SmoothingCap:
    """Smoothing level balancing exploration against the Holder approximation gap.

    h = min(1, L^(-2/(2a+1)) * T^(-1/(2a+1)) * regsq^(1/(2a+1))), unit constant.
    """
    if L <= 0 or T < 1 or regsq <= 0:
        raise ValueError("L, T, regsq must be positive")
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0,1]")
    e = 1.0 / (2.0 * alpha + 1.0)
    return SmoothingCap(min(1.0, L ** (-2.0 * e) * T ** (-e) * regsq**e))


def tune_eta_pareto(T: int, beta: float) -> float:
    """Master learning rate T^(-beta) tracing the Pareto frontier over beta in [0,1]."""
    if T < 1:
        raise ValueError("T must be positive")
    if not (0.0 <= beta <= 1.0):
        raise ValueError("beta must lie in [0,1]")
    return float(T) ** (-beta)
