"""FastAPI service wrapping the experiment harness.

Endpoints: health, experiment submission (synchronous; the response carries
summary rows and artifact paths), the self-check bench suites, report
aggregation over a results directory, and the finite smoothed benchmark.
Client mistakes (bad configs, missing files) map to 400/422; anything else
is a 500.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..core import SmoothingCap
from ..environments import smooth_benchmark_finite
from ..harness import ExperimentConfig, run_bench, run_experiment
from .schemas import (
    AggregateStats,
    BenchRequest,
    BenchResponse,
    ExperimentResponse,
    HealthResponse,
    ReportRequest,
    ReportResponse,
    SmoothBenchmarkRequest,
    SmoothBenchmarkResponse,
    SummaryRow,
)

__all__ = ["create_app"]


def _summary_row(record: dict) -> SummaryRow:
    smooth = record["final_smooth_regret"]
    return SummaryRow(
        config_hash=record["config_hash"],
        seed=int(record["seed"]),
        T=int(record["T"]),
        final_smooth_regret=None if smooth == "" else float(smooth),
        final_standard_regret=float(record["final_standard_regret"]),
        final_progressive_loss=float(record["final_progressive_loss"]),
        ci_lo=float(record["ci_lo"]),
        ci_hi=float(record["ci_hi"]),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="smoothbandits", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/experiments", response_model=ExperimentResponse)
    def experiments(config: ExperimentConfig) -> ExperimentResponse:
        try:
            result = run_experiment(config)
        except (ValueError, FileNotFoundError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except Exception as exc:  # noqa: BLE001 - surfaced as a server error
            raise HTTPException(status_code=500, detail=str(exc))
        files = [p.name for p in result.round_files] + [result.summary_file.name, result.manifest_file.name]
        return ExperimentResponse(
            config_hash=result.config_hash,
            output_dir=str(result.output_dir),
            files=files,
            summaries=[_summary_row(s) for s in result.summaries],
        )

    @app.post("/bench", response_model=BenchResponse)
    def bench(request: BenchRequest) -> BenchResponse:
        try:
            result = run_bench(request.suite, seed=request.seed)
        except Exception as exc:  # noqa: BLE001
            raise HTTPException(status_code=500, detail=str(exc))
        return BenchResponse(suite=result.suite, passed=result.passed, metrics=result.metrics)

    @app.post("/reports", response_model=ReportResponse)
    def reports(request: ReportRequest) -> ReportResponse:
        summary = Path(request.dir) / "summary.csv"
        if not summary.is_file():
            raise HTTPException(status_code=400, detail=f"no summary.csv under {request.dir}")
        with summary.open(newline="", encoding="utf-8") as fh:
            rows = [_summary_row(record) for record in csv.DictReader(fh)]
        if not rows:
            raise HTTPException(status_code=400, detail=f"{summary} has no data rows")
        smooth_values = [r.final_smooth_regret for r in rows if r.final_smooth_regret is not None]
        aggregate = AggregateStats(
            replicates=len(rows),
            mean_final_standard_regret=float(np.mean([r.final_standard_regret for r in rows])),
            mean_final_progressive_loss=float(np.mean([r.final_progressive_loss for r in rows])),
            mean_final_smooth_regret=float(np.mean(smooth_values)) if smooth_values else None,
        )
        return ReportResponse(rows=rows, aggregate=aggregate)

    @app.post("/benchmarks/smooth-finite", response_model=SmoothBenchmarkResponse)
    def smooth_finite(request: SmoothBenchmarkRequest) -> SmoothBenchmarkResponse:
        try:
            value = smooth_benchmark_finite(request.means, SmoothingCap(request.h))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return SmoothBenchmarkResponse(value=value)

    return app
