"""Adapting to unknown smoothness: stable base learners under a CORRAL master.

Each base is a smoothed-IGW learner made stable for model selection: its
exploration rate shrinks with the worst sampling probability it has seen
(through the master-supplied threshold rho), and its oracle updates carry
importance weight gamma/q. The master keeps a distribution q over bases,
samples one per round, and updates q by online mirror descent with a
log-barrier regularizer on the importance-weighted loss, doubling a base's
threshold and inflating its learning rate whenever 1/q crosses it.
"""

from __future__ import annotations

import math
from typing import Callable, List, Optional, Sequence

import numpy as np

from .core import Action, ActionSpace, Context, RoundLog, SmoothingCap, seeded_rng, validate_loss
from .regression_oracles import RegressionOracle, WeightedExample
from .sampling import make_igw_params, rejection_sample

__all__ = [
    "CorralState",
    "StableBase",
    "base_gamma",
    "gamma_h_grid",
    "grid_init",
    "run_adaptive",
    "run_stable_base",
]


def grid_init(T: int) -> List[SmoothingCap]:
    """Geometric smoothness grid [2^-1, ..., 2^-B] with B = ceil(log2 T).

    The smallest level sits below 1/T, where the regret guarantee is vacuous
    anyway, so every achievable smoothness has a grid point within a factor 2.
    """
    if T < 2:
        raise ValueError("the smoothness grid needs T >= 2")
    B = int(math.ceil(math.log2(T)))
    return [SmoothingCap(2.0 ** -(b + 1)) for b in range(B)]


def gamma_h_grid(lo: float, hi: float, count: int) -> List[float]:
    """Geometrically even grid of gamma*h products (alternative base parameterization)."""
    if lo <= 0 or hi < lo:
        raise ValueError("need 0 < lo <= hi")
    if count < 1:
        raise ValueError("count must be positive")
    return [float(v) for v in np.geomspace(lo, hi, count)]


def base_gamma(T: int, h_b: SmoothingCap, rho: float, regsq: float) -> float:
    """Stability-adjusted exploration rate sqrt(8T / (h_b * rho * RegSq(T)))."""
    if rho < 1.0:
        raise ValueError("rho must be at least 1")
    if T < 1 or regsq <= 0:
        raise ValueError("T and regsq must be positive")
    return float(np.sqrt(8.0 * T / (h_b.h * rho * regsq)))


_UNIT_CAP = SmoothingCap(1.0)


class StableBase:
    """One base learner: smoothed IGW with master-driven rate and weighted updates.

    Either ``h`` is set (rate follows ``base_gamma`` as rho grows) or
    ``fixed_gamma_h`` pins the gamma*h product directly (the exploration
    density depends on gamma and h only through their product, so a fixed
    product fully determines the sampling law; the rho schedule is inactive).
    """

    def __init__(
        self,
        index: int,
        space: ActionSpace,
        oracle: RegressionOracle,
        horizon: int,
        regsq: float,
        rng: np.random.Generator,
        h: Optional[SmoothingCap] = None,
        fixed_gamma_h: Optional[float] = None,
    ):
        if (h is None) == (fixed_gamma_h is None):
            raise ValueError("set exactly one of h and fixed_gamma_h")
        if fixed_gamma_h is not None and fixed_gamma_h <= 0:
            raise ValueError("fixed_gamma_h must be positive")
        self.index = int(index)
        self.space = space
        self.oracle = oracle
        self.horizon = int(horizon)
        self.regsq = float(regsq)
        self.rng = rng
        self.h = h
        self.fixed_gamma_h = fixed_gamma_h

    def gamma(self, rho: float) -> float:
        if self.fixed_gamma_h is not None:
            return self.fixed_gamma_h
        return base_gamma(self.horizon, self.h, rho, self.regsq)

    def density_cap(self) -> SmoothingCap:
        return self.h if self.h is not None else _UNIT_CAP

    def step(
        self,
        context: Context,
        q_tb: float,
        rho_tb: float,
        loss_callback: Callable[[Action], float],
    ) -> tuple[Action, float]:
        """Play one invoked round and update the weighted oracle with weight gamma/q."""
        if not (0.0 < q_tb <= 1.0):
            raise ValueError("q_tb must lie in (0,1]")
        gamma = self.gamma(rho_tb)
        params = make_igw_params(self.oracle, context, self.space, self.density_cap(), gamma)
        action = rejection_sample(self.oracle, context, self.space, params, self.rng)
        loss = validate_loss(loss_callback(action), "callback loss")
        self.oracle.update(
            WeightedExample(weight=gamma / q_tb, context=context, action=action, loss=loss)
        )
        return action, loss


def _log_barrier_reweight(
    q: np.ndarray, eta: np.ndarray, lhat: np.ndarray, tol: float = 1e-12, max_iter: int = 200
) -> np.ndarray:
    """Solve the log-barrier OMD step: find lambda with
    sum_b 1/(1/q_b + eta_b*(lhat_b - lambda)) = 1 and return those weights.

    The total is increasing in lambda on the feasible region, below 1 at
    min(lhat) and above 1 (or past a pole) by max(lhat), so bisection on
    that bracket converges; nonpositive denominators count as +inf.
    """
    lo, hi = float(lhat.min()), float(lhat.max())
    if hi <= lo:
        return q.copy()

    def total(lam: float) -> float:
        den = 1.0 / q + eta * (lhat - lam)
        if np.any(den <= 0.0):
            return np.inf
        return float((1.0 / den).sum())

    converged = False
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # float spacing exhausted
            converged = True
            break
        if total(mid) >= 1.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            converged = True
            break
    if not converged:
        raise ArithmeticError("log-barrier bisection did not converge")
    # evaluate on the feasible (low) side; renormalization absorbs the tolerance
    den = 1.0 / q + eta * (lhat - lo)
    qbar = 1.0 / den
    return qbar / qbar.sum()


class CorralState:
    """Master state: distribution over bases, per-base rates and thresholds."""

    def __init__(self, bases: Sequence[StableBase], eta: float, horizon: int):
        if not bases:
            raise ValueError("need at least one base")
        if not (0.0 < eta <= 1.0):
            raise ValueError("master learning rate must lie in (0,1]")
        if horizon < 2:
            raise ValueError("corral needs horizon >= 2")
        self.bases = list(bases)
        B = len(self.bases)
        self.horizon = int(horizon)
        self.master_eta = float(eta)
        self.q = np.full(B, 1.0 / B)
        self.eta = np.full(B, float(eta))
        # rho starts at 1/min q = B and only ratchets upward from there
        self.rho = np.full(B, float(B))
        self.rate_boost = math.exp(1.0 / math.log(horizon))
        self.t = 0

    @property
    def base_count(self) -> int:
        return len(self.bases)

    def _check_simplex(self) -> None:
        if np.any(self.q <= 0.0) or abs(self.q.sum() - 1.0) > 1e-10:
            raise ValueError("q must be a strictly positive probability vector")

    def sample(self, rng: np.random.Generator) -> int:
        """Draw a base index (1-based) from the current q."""
        self._check_simplex()
        u = rng.random()
        return int(np.searchsorted(np.cumsum(self.q), u, side="right")) + 1

    def update(self, index: int, realized_loss: float) -> None:
        """Importance-weighted log-barrier OMD step plus threshold doubling."""
        realized_loss = validate_loss(realized_loss)
        b = index - 1
        if not (0 <= b < self.base_count):
            raise ValueError(f"base index {index} out of range")
        lhat = np.zeros(self.base_count)
        lhat[b] = realized_loss / self.q[b]
        qbar = _log_barrier_reweight(self.q, self.eta, lhat)
        mix = 1.0 / self.horizon
        q = (1.0 - mix) * qbar + mix / self.base_count
        self.q = q / q.sum()
        crossed = 1.0 / self.q > self.rho
        self.rho[crossed] = 2.0 / self.q[crossed]
        self.eta[crossed] *= self.rate_boost
        self.t += 1


def run_adaptive(
    space: ActionSpace,
    oracle_factory: Callable[[], RegressionOracle],
    environment,
    T: int,
    eta: float,
    seed: int,
    *,
    caps: Optional[Sequence[SmoothingCap]] = None,
    gamma_h_values: Optional[Sequence[float]] = None,
    regsq: float = 1.0,
    base_count: Optional[int] = None,
) -> List[RoundLog]:
    """Run the CORRAL master over a grid of base learners for T rounds.

    Bases come from the smoothness grid by default, or from fixed gamma*h
    products when ``gamma_h_values`` is given. The single seed fans out into
    labeled streams ("corral", "base-1", "base-2", ...) so each component's
    draws are independent of the others.
    """
    if caps is not None and gamma_h_values is not None:
        raise ValueError("give either caps or gamma_h_values, not both")
    if gamma_h_values is not None:
        bases = [
            StableBase(
                b + 1, space, oracle_factory(), T, regsq,
                seeded_rng(seed, f"base-{b + 1}"), fixed_gamma_h=float(g),
            )
            for b, g in enumerate(gamma_h_values)
        ]
    else:
        levels = list(caps) if caps is not None else grid_init(T)
        if base_count is not None:
            if not (1 <= base_count <= len(levels)):
                raise ValueError("base_count must select a prefix of the grid")
            levels = levels[:base_count]
        bases = [
            StableBase(
                b + 1, space, oracle_factory(), T, regsq,
                seeded_rng(seed, f"base-{b + 1}"), h=cap,
            )
            for b, cap in enumerate(levels)
        ]
    state = CorralState(bases, eta, T)
    rng_master = seeded_rng(seed, "corral")
    logs: List[RoundLog] = []
    for t in range(1, T + 1):
        context = environment.next_context()
        picked = state.sample(rng_master)
        base = state.bases[picked - 1]
        action, loss = base.step(
            context,
            float(state.q[picked - 1]),
            float(state.rho[picked - 1]),
            lambda a: environment.realize_loss(context, a),
        )
        state.update(picked, loss)
        logs.append(
            RoundLog(
                t=t,
                action=action,
                realized_loss=loss,
                base_index=picked,
                mean_loss=validate_loss(environment.mean_loss(context, action), "mean_loss"),
                context=context,
            )
        )
    return logs


def run_stable_base(
    space: ActionSpace,
    oracle: RegressionOracle,
    environment,
    T: int,
    h: SmoothingCap,
    regsq: float,
    rng: np.random.Generator,
) -> List[RoundLog]:
    """Standalone run of one stable base (every round invoked, q = 1, rho = 1)."""
    base = StableBase(1, space, oracle, T, regsq, rng, h=h)
    logs: List[RoundLog] = []
    for t in range(1, T + 1):
        context = environment.next_context()
        action, loss = base.step(context, 1.0, 1.0, lambda a: environment.realize_loss(context, a))
        logs.append(
            RoundLog(
                t=t,
                action=action,
                realized_loss=loss,
                mean_loss=validate_loss(environment.mean_loss(context, action), "mean_loss"),
                context=context,
            )
        )
    return logs
