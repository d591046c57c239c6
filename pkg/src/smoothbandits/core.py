"""Shared domain types, run configuration, and deterministic randomness.

Everything downstream (oracles, samplers, learners, environments, the
experiment harness) builds on the small vocabulary defined here: action
spaces with their base sampling measure, actions, contexts, smoothing
levels, per-round logs, and seeded random streams.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

__all__ = [
    "Action",
    "ActionSpace",
    "ContinuousAction",
    "Context",
    "DiscreteAction",
    "EMPTY_CONTEXT",
    "FiniteActions",
    "IntervalActions",
    "RoundLog",
    "RunConfig",
    "SmoothingCap",
    "check_action_in_space",
    "load_run_config",
    "read_kv_file",
    "run_config_from_mapping",
    "seeded_rng",
    "validate_loss",
]

_U64 = (1 << 64) - 1


def seeded_rng(seed: int, stream_label: str) -> np.random.Generator:
    """Deterministic random stream derived from (seed, label).

    A single run seed fans out into independent labeled streams ("env",
    "policy", "corral", "base-3", ...) so adding draws to one component
    never perturbs another component's stream. Identical (seed, label)
    pairs always produce identical streams.
    """
    digest = hashlib.sha256(stream_label.encode("utf-8")).digest()
    label_words = [int.from_bytes(digest[i : i + 8], "little") for i in range(0, 32, 8)]
    entropy = [seed & _U64, *label_words]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def validate_loss(value: float, what: str = "loss") -> float:
    """Reject losses outside [0,1] (hard error, never a silent clamp)."""
    value = float(value)
    if not np.isfinite(value) or value < 0.0 or value > 1.0:
        raise ValueError(f"{what} must lie in [0,1], got {value!r}")
    return value


@dataclass(frozen=True)
class FiniteActions:
    """Finite arm set {1..count} with the uniform base measure (mass 1/count per arm)."""

    count: int

    def __post_init__(self) -> None:
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"finite action space needs count >= 1, got {self.count!r}")
        object.__setattr__(self, "count", int(self.count))

    def sample(self, rng: np.random.Generator) -> "DiscreteAction":
        """One draw from the base measure: a uniform arm index."""
        return DiscreteAction(int(rng.integers(1, self.count + 1)))

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.integers(1, self.count + 1, size=n)


@dataclass(frozen=True)
class IntervalActions:
    """Unit interval [0,1] with the Lebesgue (uniform) base measure.

    Fixed to [0,1]; affine rescaling of other ranges is the caller's job.
    """

    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self) -> None:
        if (self.lo, self.hi) != (0.0, 1.0):
            raise ValueError("interval action spaces are fixed to [0,1]")

    def sample(self, rng: np.random.Generator) -> "ContinuousAction":
        return ContinuousAction(float(rng.random()))

    def sample_many(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.random(n)


ActionSpace = Union[FiniteActions, IntervalActions]


@dataclass(frozen=True)
class DiscreteAction:
    """Arm index in [1, K]."""

    index: int

    def __post_init__(self) -> None:
        if int(self.index) != self.index or self.index < 1:
            raise ValueError(f"arm index must be a positive integer, got {self.index!r}")
        object.__setattr__(self, "index", int(self.index))

    def key(self) -> int:
        return self.index


@dataclass(frozen=True)
class ContinuousAction:
    """Point in [0,1]."""

    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"continuous action must lie in [0,1], got {self.value!r}")
        object.__setattr__(self, "value", v)

    def key(self) -> float:
        return self.value


Action = Union[DiscreteAction, ContinuousAction]


def check_action_in_space(action: Action, space: ActionSpace) -> None:
    """Raise if the action variant does not match the owning space."""
    if isinstance(space, FiniteActions):
        if not isinstance(action, DiscreteAction):
            raise TypeError(f"finite space expects a DiscreteAction, got {type(action).__name__}")
        if action.index > space.count:
            raise ValueError(f"arm index {action.index} exceeds arm count {space.count}")
    else:
        if not isinstance(action, ContinuousAction):
            raise TypeError(f"interval space expects a ContinuousAction, got {type(action).__name__}")


@dataclass(frozen=True, eq=False)
class Context:
    """Observed side information; features may be empty for non-contextual problems."""

    features: np.ndarray = field(default_factory=lambda: np.empty(0))
    id: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))


EMPTY_CONTEXT = Context()


@dataclass(frozen=True)
class SmoothingCap:
    """Smoothness level h: benchmark kernels have density at most 1/h w.r.t. the base measure."""

    h: float

    def __post_init__(self) -> None:
        h = float(self.h)
        if not (0.0 < h <= 1.0):
            raise ValueError(f"smoothing level must lie in (0,1], got {self.h!r}")
        object.__setattr__(self, "h", h)


@dataclass(frozen=True)
class RunConfig:
    """Run-level parameters shared by learners and the harness."""

    horizon: int
    seed: int
    smoothing: Optional[SmoothingCap] = None
    gamma_override: Optional[float] = None
    # None = derive from the oracle family (log|F|, log(K*T), ...)
    regsq_estimate: Optional[float] = None
    corral_eta: Optional[float] = None
    base_count_override: Optional[int] = None

    def __post_init__(self) -> None:
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon!r}")
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "seed", int(self.seed) & _U64)
        if self.regsq_estimate is not None and self.regsq_estimate <= 0:
            raise ValueError(f"regsq_estimate must be positive, got {self.regsq_estimate!r}")
        if self.gamma_override is not None and self.gamma_override <= 0:
            raise ValueError(f"gamma_override must be positive, got {self.gamma_override!r}")
        if self.corral_eta is not None and not (0.0 < self.corral_eta <= 1.0):
            raise ValueError(f"corral_eta must lie in (0,1], got {self.corral_eta!r}")
        if self.base_count_override is not None and self.base_count_override < 1:
            raise ValueError(f"base_count_override must be >= 1, got {self.base_count_override!r}")


@dataclass
class RoundLog:
    """One played round: what was chosen, what it cost, and what the benchmark paid.

    ``mean_loss`` (the conditional mean of the played action) and
    ``benchmark`` are environment truths; runners fill ``mean_loss`` and
    the harness fills ``benchmark`` lazily since the learner never sees
    either.
    """

    t: int
    action: Action
    realized_loss: float
    base_index: Optional[int] = None
    mean_loss: Optional[float] = None
    benchmark: Optional[float] = None
    # transient: the round's context, kept so benchmarks can be computed
    # lazily; never serialized
    context: Optional[Context] = None

    def __post_init__(self) -> None:
        self.realized_loss = validate_loss(self.realized_loss, "realized_loss")
        if self.mean_loss is not None:
            self.mean_loss = validate_loss(self.mean_loss, "mean_loss")
        if self.benchmark is not None:
            self.benchmark = validate_loss(self.benchmark, "benchmark")


def read_kv_file(path: Union[str, Path]) -> dict[str, str]:
    """Parse a flat key=value text file: one pair per line, '#' comments, blank lines ignored."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ValueError(f"{path}:{lineno}: empty key")
        if key in mapping:
            raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
        mapping[key] = value.strip()
    return mapping


_RUN_CONFIG_KEYS = {
    "horizon",
    "seed",
    "smoothing",
    "gamma_override",
    "regsq_estimate",
    "corral_eta",
    "base_count_override",
}


def run_config_from_mapping(mapping: dict[str, str], *, allow_extra: bool = False) -> RunConfig:
    """Build a RunConfig from string key/value pairs (keys match field names verbatim)."""
    unknown = set(mapping) - _RUN_CONFIG_KEYS
    if unknown and not allow_extra:
        raise ValueError(f"unknown run config keys: {sorted(unknown)}")
    for required in ("horizon", "seed"):
        if required not in mapping:
            raise ValueError(f"run config is missing required key {required!r}")
    kwargs: dict = {
        "horizon": int(mapping["horizon"]),
        "seed": int(mapping["seed"]),
    }
    if "smoothing" in mapping:
        kwargs["smoothing"] = SmoothingCap(float(mapping["smoothing"]))
    if "gamma_override" in mapping:
        kwargs["gamma_override"] = float(mapping["gamma_override"])
    if "regsq_estimate" in mapping:
        kwargs["regsq_estimate"] = float(mapping["regsq_estimate"])
    if "corral_eta" in mapping:
        kwargs["corral_eta"] = float(mapping["corral_eta"])
    if "base_count_override" in mapping:
        kwargs["base_count_override"] = int(mapping["base_count_override"])
    return RunConfig(**kwargs)


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Load a RunConfig from a flat key=value file."""
    return run_config_from_mapping(read_kv_file(path))
