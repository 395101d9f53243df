"""Command-line front end.

Subcommands: simulate, solve, verify-bounds, benchmark, serve. Every
subcommand except serve accepts --server URL to run against a remote
service instead of in-process; files on disk use the same JSON documents
either way. Exit codes: 0 success, 1 runtime or data error, 2 usage error.
Set PNL_LOG=info|debug for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

import pydantic

from .errors import RotamaxError
from .schemas import (
    CorrespondenceDocument,
    SimulateRequest,
    SimulateResponse,
    SolveOptions,
    SolveRequest,
    SolveResponse,
    VerifyBoundsReport,
    VerifyBoundsRequest,
)
from .service import (
    configure_logging,
    logger,
    run_simulate,
    run_solve,
    run_verify_bounds,
)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotamax",
        description="Certified rotation consensus maximization for "
        "perspective-n-lines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic scene")
    p_sim.add_argument("--lines", type=int, required=True, help="number of lines")
    p_sim.add_argument("--outlier-ratio", type=float, default=0.0)
    p_sim.add_argument(
        "--noise-deg", type=float, default=0.0, help="normal tilt sigma, degrees"
    )
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument(
        "--outlier-mode", choices=("uniform", "mismatch"), default="uniform"
    )
    p_sim.add_argument("--out", required=True, help="correspondence file to write")
    p_sim.add_argument("--gt", required=True, help="ground-truth file to write")
    p_sim.add_argument("--server", default=None, help="service base URL")

    p_sol = sub.add_parser("solve", help="solve a correspondence file")
    p_sol.add_argument("--input", required=True, help="correspondence file")
    p_sol.add_argument("--epsilon", type=float, required=True)
    p_sol.add_argument("--min-edge", type=float, default=1e-3)
    p_sol.add_argument("--max-nodes", type=int, default=1_000_000)
    p_sol.add_argument(
        "--branch-order", choices=("split-longest", "quadrisect"),
        default="split-longest",
    )
    p_sol.add_argument("--workers", type=int, default=1)
    p_sol.add_argument(
        "--no-refine", action="store_true",
        help="stop at min-edge instead of refining the best cube further",
    )
    p_sol.add_argument(
        "--timing", action="store_true",
        help="fill time fields (off by default so reruns are byte-identical)",
    )
    p_sol.add_argument("--out", default=None, help="result file (default stdout)")
    p_sol.add_argument("--node-log", default=None, help="per-node CSV file")
    p_sol.add_argument("--server", default=None, help="service base URL")

    p_ver = sub.add_parser("verify-bounds", help="bound soundness vs grid oracle")
    p_ver.add_argument("--trials", type=int, required=True)
    p_ver.add_argument("--grid", type=int, default=2000)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--out", default=None, help="report file (default stdout)")
    p_ver.add_argument("--server", default=None, help="service base URL")

    p_ben = sub.add_parser("benchmark", help="time the solver on seeded scenes")
    p_ben.add_argument("--lines", type=int, default=100)
    p_ben.add_argument("--outlier-ratio", type=float, default=0.5)
    p_ben.add_argument("--noise-deg", type=float, default=0.1)
    p_ben.add_argument("--epsilon", type=float, default=0.01)
    p_ben.add_argument("--trials", type=int, default=5)
    p_ben.add_argument("--seed", type=int, default=0)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)

    return parser


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


def _read_document(path: str) -> CorrespondenceDocument:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    try:
        return CorrespondenceDocument.model_validate_json(raw)
    except pydantic.ValidationError as exc:
        # pydantic reports the JSON path (or line/column) of each failure
        raise DataError(f"{path}: {exc}") from exc


def _write_text(path: Optional[str], text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n")


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    url = server.rstrip("/") + route
    try:
        resp = httpx.post(url, json=payload, timeout=3600.0)
    except httpx.HTTPError as exc:
        raise DataError(f"request to {url} failed: {exc}") from exc
    if resp.status_code != 200:
        raise DataError(f"{url} returned {resp.status_code}: {resp.text}")
    return resp.json()


def _cmd_simulate(args: argparse.Namespace) -> int:
    _check(args.lines >= 1, "--lines must be at least 1")
    _check(0.0 <= args.outlier_ratio <= 1.0, "--outlier-ratio must be in [0, 1]")
    _check(args.noise_deg >= 0.0, "--noise-deg must be nonnegative")
    req = SimulateRequest(
        lines=args.lines,
        outlier_ratio=args.outlier_ratio,
        noise_sigma=math.radians(args.noise_deg),
        seed=args.seed,
        outlier_mode=args.outlier_mode,
    )
    if args.server:
        resp = SimulateResponse.model_validate(
            _post(args.server, "/simulate", req.model_dump(mode="json"))
        )
    else:
        resp = run_simulate(req)
    _write_text(args.out, resp.correspondences.model_dump_json(indent=2))
    _write_text(args.gt, resp.ground_truth.model_dump_json(indent=2))
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    _check(args.epsilon > 0.0, "--epsilon must be > 0")
    _check(args.min_edge > 0.0, "--min-edge must be > 0")
    _check(args.max_nodes >= 1, "--max-nodes must be at least 1")
    _check(args.workers >= 1, "--workers must be at least 1")
    doc = _read_document(args.input)
    req = SolveRequest(
        correspondences=doc,
        options=SolveOptions(
            epsilon=args.epsilon,
            min_edge=args.min_edge,
            max_nodes=args.max_nodes,
            branch_order=args.branch_order,
            workers=args.workers,
            refine=not args.no_refine,
            timing=args.timing,
        ),
        node_log=args.node_log is not None,
    )
    if args.server:
        resp = SolveResponse.model_validate(
            _post(args.server, "/solve", req.model_dump(mode="json"))
        )
    else:
        resp = run_solve(req)
    _write_text(args.out, resp.result.model_dump_json(indent=2))
    if args.node_log is not None:
        _write_text(args.node_log, resp.node_log or "")
    return 0


def _cmd_verify_bounds(args: argparse.Namespace) -> int:
    _check(args.trials >= 1, "--trials must be at least 1")
    _check(args.grid >= 2, "--grid must be at least 2")
    req = VerifyBoundsRequest(trials=args.trials, grid=args.grid, seed=args.seed)
    if args.server:
        report = VerifyBoundsReport.model_validate(
            _post(args.server, "/verify-bounds", req.model_dump(mode="json"))
        )
    else:
        report = run_verify_bounds(req)
    _write_text(args.out, report.model_dump_json(indent=2))
    return 0 if report.ok else 1


def _cmd_benchmark(args: argparse.Namespace) -> int:
    _check(args.lines >= 1, "--lines must be at least 1")
    _check(0.0 <= args.outlier_ratio <= 1.0, "--outlier-ratio must be in [0, 1]")
    _check(args.epsilon > 0.0, "--epsilon must be > 0")
    _check(args.trials >= 1, "--trials must be at least 1")
    from .simulate import SceneConfig, generate_scene
    from .solver import SolverConfig, solve

    times, nodes = [], []
    for trial in range(args.trials):
        data, _ = generate_scene(
            SceneConfig(
                num_lines=args.lines,
                outlier_ratio=args.outlier_ratio,
                noise_sigma=math.radians(args.noise_deg),
                seed=args.seed + trial,
            )
        )
        res = solve(data, SolverConfig(epsilon=args.epsilon, timing=True))
        times.append(res.stats.time_ms)
        nodes.append(res.stats.nodes)
        print(
            f"seed {args.seed + trial}: consensus {res.consensus} "
            f"gap {res.gap} nodes {res.stats.nodes} "
            f"time {res.stats.time_ms:.1f} ms"
        )
    times.sort()
    nodes.sort()
    mid = len(times) // 2
    print(f"median: {times[mid]:.1f} ms, {nodes[mid]} nodes over {args.trials} runs")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .api import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging()
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    handlers = {
        "simulate": _cmd_simulate,
        "solve": _cmd_solve,
        "verify-bounds": _cmd_verify_bounds,
        "benchmark": _cmd_benchmark,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DataError, RotamaxError, pydantic.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
