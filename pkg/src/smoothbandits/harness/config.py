"""Experiment configuration: pydantic models plus the flat key=value file format.

The same models double as the HTTP service's request schema; the CLI parses
flat key=value files (or JSON) into them before submitting.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core import RunConfig, SmoothingCap, read_kv_file
from .stats import Metric

__all__ = [
    "ConstantEnvSpec",
    "ArmDatasetEnvSpec",
    "CorralSettings",
    "EnvironmentSpec",
    "ExperimentConfig",
    "HolderEnvSpec",
    "MultipleBestArmsEnvSpec",
    "OracleSettings",
    "RegressionDatasetEnvSpec",
    "experiment_config_from_kv",
    "load_experiment_config",
]


class MultipleBestArmsEnvSpec(BaseModel):
    kind: Literal["multiple_best_arms"] = "multiple_best_arms"
    arms: int = Field(ge=1)
    optimal_arms: int = Field(ge=1)
    optimal_mean: float = 0.0
    suboptimal_mean: float = 0.5


class HolderEnvSpec(BaseModel):
    kind: Literal["holder"] = "holder"
    L: float = Field(default=1.0, gt=0)
    alpha: float = Field(default=1.0, gt=0, le=1)
    context_dim: int = Field(default=2, ge=1)


class ArmDatasetEnvSpec(BaseModel):
    kind: Literal["arm_dataset"] = "arm_dataset"
    path: str


class RegressionDatasetEnvSpec(BaseModel):
    kind: Literal["regression_dataset"] = "regression_dataset"
    path: str
    shuffle: bool = False


class ConstantEnvSpec(BaseModel):
    kind: Literal["constant"] = "constant"
    value: float = Field(default=0.5, ge=0, le=1)
    arms: Optional[int] = Field(default=None, ge=1)  # None = interval space


EnvironmentSpec = Annotated[
    Union[
        MultipleBestArmsEnvSpec,
        HolderEnvSpec,
        ArmDatasetEnvSpec,
        RegressionDatasetEnvSpec,
        ConstantEnvSpec,
    ],
    Field(discriminator="kind"),
]

_FINITE_KINDS = ("multiple_best_arms", "arm_dataset")


class OracleSettings(BaseModel):
    step_size: float = Field(default=0.05, gt=0)
    step_decay: bool = True
    expert_count: int = Field(default=33, ge=1)  # interval-space expert grid
    rff_features: int = Field(default=256, ge=1)
    rff_bandwidth: float = Field(default=1.0, gt=0)


class CorralSettings(BaseModel):
    grid: Literal["h", "gamma_h"] = "h"
    gamma_h_lo: float = Field(default=1e3, gt=0)
    gamma_h_hi: float = Field(default=1e6, gt=0)
    gamma_h_count: int = Field(default=8, ge=1)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    run: RunConfig
    learner: Literal["smooth_igw", "corral", "epsilon_greedy_baseline", "uniform_baseline"]
    oracle: Literal["tabular", "aggregation", "parametric", "parametric_rff"]
    environment: EnvironmentSpec
    metric: Metric
    output_dir: str
    replicates: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)
    epsilon: float = Field(default=1.0, gt=0)  # epsilon-greedy scale, eps_t = min(1, eps * t^-1/3)
    oracle_settings: OracleSettings = OracleSettings()
    corral_settings: CorralSettings = CorralSettings()

    def effective_h(self) -> Optional[SmoothingCap]:
        return self.metric.h or self.run.smoothing

    @model_validator(mode="after")
    def _cross_checks(self) -> "ExperimentConfig":
        problems: list[str] = []
        env_finite = self.environment.kind in _FINITE_KINDS or (
            self.environment.kind == "constant" and self.environment.arms is not None
        )
        if self.learner == "smooth_igw" and self.effective_h() is None:
            problems.append("smooth_igw needs a smoothing level (metric.h or run.smoothing)")
        if self.learner == "corral":
            if self.run.corral_eta is None:
                problems.append("corral needs run.corral_eta")
            if self.run.horizon < 2:
                problems.append("corral needs horizon >= 2")
        if self.oracle == "tabular" and not env_finite:
            problems.append("the tabular oracle needs a finite action space")
        if self.oracle in ("parametric", "parametric_rff") and env_finite:
            problems.append("parametric oracles need an interval action space")
        if self.oracle == "parametric_rff" and self.environment.kind != "regression_dataset":
            problems.append("parametric_rff preprocessing only applies to regression datasets")
        if problems:
            raise ValueError("; ".join(problems))
        return self


_RUN_KEYS = {
    "horizon": int,
    "seed": int,
    "gamma_override": float,
    "regsq_estimate": float,
    "corral_eta": float,
    "base_count_override": int,
}
_TOP_KEYS = {
    "learner": str,
    "oracle": str,
    "output_dir": str,
    "replicates": int,
    "workers": int,
    "epsilon": float,
}
_ORACLE_KEYS = {
    "oracle_step_size": ("step_size", float),
    "oracle_step_decay": ("step_decay", bool),
    "expert_count": ("expert_count", int),
    "rff_features": ("rff_features", int),
    "rff_bandwidth": ("rff_bandwidth", float),
}
_CORRAL_KEYS = {
    "corral_grid": ("grid", str),
    "gamma_h_lo": ("gamma_h_lo", float),
    "gamma_h_hi": ("gamma_h_hi", float),
    "gamma_h_count": ("gamma_h_count", int),
}
_ENV_KEYS = {
    "arms": int,
    "optimal_arms": int,
    "optimal_mean": float,
    "suboptimal_mean": float,
    "L": float,
    "alpha": float,
    "context_dim": int,
    "path": str,
    "shuffle": bool,
    "value": float,
}


def _to_bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def experiment_config_from_kv(mapping: dict[str, str]) -> ExperimentConfig:
    """Assemble an ExperimentConfig from flat key=value pairs.

    Run keys keep their RunConfig names verbatim; environment keys are flat
    alongside ``environment=<kind>``. Unknown keys are reported together so a
    bad file fails with the full list.
    """
    data: dict = {"run": {}, "metric": {}, "oracle_settings": {}, "corral_settings": {}}
    env: dict = {}
    unknown: list[str] = []
    for key, raw in mapping.items():
        if key in _RUN_KEYS:
            data["run"][key] = _RUN_KEYS[key](raw)
        elif key == "smoothing":
            data["run"]["smoothing"] = {"h": float(raw)}
        elif key in _TOP_KEYS:
            data[key] = _TOP_KEYS[key](raw)
        elif key == "metric":
            data["metric"]["name"] = raw
        elif key == "metric_h":
            data["metric"]["h"] = {"h": float(raw)}
        elif key in _ORACLE_KEYS:
            field, cast = _ORACLE_KEYS[key]
            data["oracle_settings"][field] = _to_bool(raw) if cast is bool else cast(raw)
        elif key in _CORRAL_KEYS:
            field, cast = _CORRAL_KEYS[key]
            data["corral_settings"][field] = cast(raw)
        elif key == "environment":
            env["kind"] = raw
        elif key in _ENV_KEYS:
            cast = _ENV_KEYS[key]
            env[key] = _to_bool(raw) if cast is bool else cast(raw)
        else:
            unknown.append(key)
    if unknown:
        raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
    if "kind" not in env:
        raise ValueError("missing 'environment' key")
    data["environment"] = env
    return ExperimentConfig.model_validate(data)


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """Load an experiment config from a flat key=value file or a .json file."""
    path = Path(path)
    if path.suffix == ".json":
        return ExperimentConfig.model_validate_json(path.read_text(encoding="utf-8"))
    return experiment_config_from_kv(read_kv_file(path))
