"""Request/response models for the HTTP service.

Experiment submissions reuse ``ExperimentConfig`` directly as the request
body; these models cover the remaining payloads.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

__all__ = [
    "AggregateStats",
    "BenchRequest",
    "BenchResponse",
    "ExperimentResponse",
    "HealthResponse",
    "ReportRequest",
    "ReportResponse",
    "SmoothBenchmarkRequest",
    "SmoothBenchmarkResponse",
    "SummaryRow",
]


class HealthResponse(BaseModel):
    status: str
    version: str


class SummaryRow(BaseModel):
    config_hash: str
    seed: int
    T: int
    final_smooth_regret: Optional[float] = None  # None when no smoothing level was configured
    final_standard_regret: float
    final_progressive_loss: float
    ci_lo: float
    ci_hi: float


class ExperimentResponse(BaseModel):
    config_hash: str
    output_dir: str
    files: list[str]
    summaries: list[SummaryRow]


class BenchRequest(BaseModel):
    suite: Literal["sampling", "dec", "regret"]
    seed: int = 0


class BenchResponse(BaseModel):
    suite: str
    passed: bool
    metrics: dict


class ReportRequest(BaseModel):
    dir: str


class AggregateStats(BaseModel):
    replicates: int
    mean_final_standard_regret: float
    mean_final_progressive_loss: float
    mean_final_smooth_regret: Optional[float] = None


class ReportResponse(BaseModel):
    rows: list[SummaryRow]
    aggregate: AggregateStats


class SmoothBenchmarkRequest(BaseModel):
    means: list[float] = Field(min_length=1)
    h: float = Field(gt=0, le=1)


class SmoothBenchmarkResponse(BaseModel):
    value: float
