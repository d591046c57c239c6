"""Command-line interface: a thin client over the service.

    smoothbandits run --config experiment.cfg
    smoothbandits bench --suite sampling
    smoothbandits report --dir results/
    smoothbandits serve --port 8000

Commands run against an in-process service by default, or a remote one via
--server. Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

import httpx

from .client import ServiceClient, ServiceError
from .harness import load_experiment_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

_CONFIG_STATUSES = (400, 404, 422)

__all__ = ["main", "EXIT_OK", "EXIT_CONFIG", "EXIT_RUNTIME"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smoothbandits", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment from a config file")
    run_p.add_argument("--config", required=True, help="flat key=value file or .json")
    run_p.add_argument("--server", default=None, help="service URL (default: in-process)")

    bench_p = sub.add_parser("bench", help="run a self-check suite")
    bench_p.add_argument("--suite", required=True, choices=["sampling", "dec", "regret"])
    bench_p.add_argument("--seed", type=int, default=0)
    bench_p.add_argument("--server", default=None)

    report_p = sub.add_parser("report", help="aggregate a results directory")
    report_p.add_argument("--dir", required=True)
    report_p.add_argument("--server", default=None)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    return parser


def _exit_code(error: ServiceError) -> int:
    return EXIT_CONFIG if error.status_code in _CONFIG_STATUSES else EXIT_RUNTIME


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_experiment_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    client = ServiceClient(base_url=args.server)
    try:
        payload = client.run_experiment(json.loads(config.model_dump_json()))
    except ServiceError as exc:
        print(str(exc), file=sys.stderr)
        return _exit_code(exc)
    print(f"config {payload['config_hash']} -> {payload['output_dir']}")
    for row in payload["summaries"]:
        smooth = row["final_smooth_regret"]
        smooth_str = "-" if smooth is None else f"{smooth:.4f}"
        print(
            f"  seed {row['seed']}: T={row['T']} smooth={smooth_str} "
            f"standard={row['final_standard_regret']:.4f} "
            f"loss={row['final_progressive_loss']:.6f} "
            f"ci=[{row['ci_lo']:.6f}, {row['ci_hi']:.6f}]"
        )
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    client = ServiceClient(base_url=args.server)
    try:
        payload = client.bench(args.suite, seed=args.seed)
    except ServiceError as exc:
        print(str(exc), file=sys.stderr)
        return _exit_code(exc)
    status = "PASS" if payload["passed"] else "FAIL"
    print(f"bench {payload['suite']}: {status}")
    for key, value in payload["metrics"].items():
        print(f"  {key} = {value}")
    return EXIT_OK if payload["passed"] else EXIT_RUNTIME


def _cmd_report(args: argparse.Namespace) -> int:
    client = ServiceClient(base_url=args.server)
    try:
        payload = client.report(args.dir)
    except ServiceError as exc:
        print(str(exc), file=sys.stderr)
        return _exit_code(exc)
    for row in payload["rows"]:
        smooth = row["final_smooth_regret"]
        smooth_str = "-" if smooth is None else f"{smooth:.4f}"
        print(
            f"seed {row['seed']}: T={row['T']} smooth={smooth_str} "
            f"standard={row['final_standard_regret']:.4f} loss={row['final_progressive_loss']:.6f}"
        )
    agg = payload["aggregate"]
    print(
        f"mean over {agg['replicates']} replicate(s): "
        f"standard={agg['mean_final_standard_regret']:.4f} "
        f"loss={agg['mean_final_progressive_loss']:.6f}"
    )
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "bench": _cmd_bench, "report": _cmd_report, "serve": _cmd_serve}
    try:
        return handlers[args.command](args)
    except httpx.ConnectError as exc:  # pragma: no cover - needs a dead server
        print(f"cannot reach server: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
