"""Command-line client for the placement service.

Every subcommand posts a config document to the service API; by default the
requests run against an in-process instance of the app, so no server needs
to be running. ``--server`` points the same commands at a remote instance.

Exit codes: 0 success, 1 verification/run failure, 2 config error.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

GNUPLOT_TEMPLATE = """\
set datafile separator ","
set key autotitle columnhead
set xlabel "{xlabel}"
set ylabel "{ylabel}"
plot {plots}
"""


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return doc


class ConfigError(Exception):
    pass


def _apply_overrides(doc: dict, args: argparse.Namespace) -> dict:
    doc = dict(doc)
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "strict_lmin", False):
        doc["strict_lmin"] = True
    if getattr(args, "quick", False):
        doc["quick"] = True
    return doc


async def _post(args: argparse.Namespace, route: str, payload: dict | None) -> httpx.Response:
    if args.server:
        async with httpx.AsyncClient(base_url=args.server, timeout=600.0) as client:
            return await client.post(route, json=payload)
    from .service.app import app

    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(
        transport=transport, base_url="http://codedcache.local", timeout=600.0
    ) as client:
        return await client.post(route, json=payload)


def _request(args: argparse.Namespace, route: str, payload: dict | None) -> dict:
    try:
        response = asyncio.run(_post(args, route, payload))
    except httpx.HTTPError as exc:
        print(f"error: cannot reach the service: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_FAILURE)
    if response.status_code in (400, 422):
        print(f"config error: {response.text}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    if response.status_code == 409:
        print(f"infeasible request: {response.text}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    if response.status_code != 200:
        print(f"service error {response.status_code}: {response.text}", file=sys.stderr)
        raise SystemExit(EXIT_FAILURE)
    return response.json()


def _cmd_optimize(args: argparse.Namespace) -> int:
    doc = _apply_overrides(_load_config(args.config), args)
    doc.setdefault("scenario", "delay_sweep")
    body = _request(args, "/optimize", doc)
    print(
        f"w={body['w']} budget_segments={body['budget_segments']} "
        f"floor_fragments={body['floor_fragments']}"
    )
    for result in sorted(body["results"], key=lambda r: r["policy"]):
        print(
            f"  {result['policy']:<9} avg_delay={result['avg_delay']:.9g} "
            f"approx={result['approx_avg_delay']:.9g} "
            f"exact={str(result['exact_termination']).lower()} "
            f"budget_used={result['budget_used']}"
        )
    return EXIT_OK


def _cmd_cost_min(args: argparse.Namespace) -> int:
    doc = _apply_overrides(_load_config(args.config), args)
    doc.setdefault("scenario", "cost_sweep")
    body = _request(args, "/cost-min", doc)
    print(
        f"w={body['w']} d_avg_max={body['d_avg_max']} "
        f"budget_segments={body['budget_segments']}"
    )
    for result in sorted(body["results"], key=lambda r: r["policy"]):
        normalized = result["avg_delay_cached_normalized"]
        normalized_text = f"{normalized:.9g}" if normalized is not None else "-"
        print(
            f"  {result['policy']:<9} theta={result['theta']:.9g} "
            f"avg_delay={result['avg_delay']:.9g} "
            f"avg_delay_cached_normalized={normalized_text} "
            f"cached_count={result['cached_count']}"
        )
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    doc = _apply_overrides(_load_config(args.config), args)
    doc.setdefault("scenario", "simulate")
    body = _request(args, "/simulate", doc)
    print(
        f"fragment_sizes={tuple(body['fragment_sizes'])} "
        f"formula_delay={body['formula_delay']} trials={body['trials']} "
        f"measured(min/mean/max)={body['min_delay']}/{body['mean_delay']:.9g}/"
        f"{body['max_delay']}"
    )
    print(f"deltas={tuple(body['deltas'])}")
    if body.get("payload_matches") is not None:
        print(f"payload_matches={str(body['payload_matches']).lower()}")
    if body.get("trace"):
        for line in body["trace"]:
            print(line)
    return EXIT_OK


def _write_gnuplot(args: argparse.Namespace, scenario: str, csv_path: str):
    if scenario == "delay_sweep":
        xlabel, ylabel, xcol, ycol = "c_hat", "avg_delay", 2, 4
    else:
        xlabel, ylabel, xcol, ycol = "d_avg_max", "theta", 2, 4
    plots = ", ".join(
        f'"{csv_path}" using {xcol}:(strcol(3) eq "{policy}" ? ${ycol} : 1/0) '
        f'with linespoints title "{policy}"'
        for policy in ("proposed", "mpfc", "efc")
    )
    Path(args.gnuplot).write_text(
        GNUPLOT_TEMPLATE.format(xlabel=xlabel, ylabel=ylabel, plots=plots)
    )


def _cmd_sweep(args: argparse.Namespace) -> int:
    doc = _apply_overrides(_load_config(args.config), args)
    body = _request(args, "/sweep", doc)
    Path(args.out).write_text(body["csv"])
    print(f"wrote {body['row_count']} rows to {args.out}")
    if args.gnuplot:
        _write_gnuplot(args, body["scenario"], args.out)
        print(f"wrote gnuplot script to {args.gnuplot}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    doc = _apply_overrides(_load_config(args.config), args)
    doc.setdefault("scenario", "verify")
    body = _request(args, "/verify", doc)
    width = max(len(s["name"]) for s in body["suites"])
    for suite in body["suites"]:
        status = "PASS" if suite["passed"] else "FAIL"
        print(f"{status}  {suite['name']:<{width}}  cases={suite['cases']}  {suite['detail']}")
        for failure in suite["failures"]:
            print(f"      {failure}")
    if body["passed"]:
        print("verification passed")
        return EXIT_OK
    print("verification FAILED", file=sys.stderr)
    return EXIT_FAILURE


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("codedcache.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="codedcache",
        description="Client for the coded cache placement service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config_required: bool = True):
        p.add_argument(
            "--config",
            required=config_required,
            help="JSON config file (one experiment spec document)",
        )
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument(
            "--strict-lmin",
            action="store_true",
            help="require the floor level to beat the per-file cap strictly",
        )
        p.add_argument(
            "--server",
            default=None,
            help="base URL of a running service (default: run in-process)",
        )

    p = sub.add_parser("optimize", help="one delay-minimization run per policy")
    common(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("cost-min", help="one delay-capped cost run per policy")
    common(p)
    p.set_defaults(func=_cmd_cost_min)

    p = sub.add_parser("simulate", help="simulate streaming sessions for one file")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a sweep and write its CSV")
    common(p)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument(
        "--gnuplot", default=None, help="also write a gnuplot script to this path"
    )
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="run the self-verification suites")
    common(p, config_required=False)
    p.add_argument(
        "--quick", action="store_true", help="smaller workloads for a smoke run"
    )
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("serve", help="run the HTTP service with uvicorn")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
