"""Command line interface: single-cell runs and the benchmark sweep."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from .config import ConfigError, default_scenario, load_scenario
from .engine import RunHandle, run
from .metrics import write_csv
from .strategy import STRATEGIES

OUT_DIR_ENV = "VECSIM_OUT"
DEFAULT_OUT = "results"


def _parse_vehicles(text: str) -> list[int]:
    """Accept a LO:HI:STEP range (inclusive ends) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected LO:HI:STEP, got {text!r}")
        lo, hi, step = (int(p) for p in parts)
        if step <= 0 or hi < lo:
            raise ValueError(f"bad vehicle range {text!r}")
        values = list(range(lo, hi + 1, step))
    else:
        values = [int(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ValueError("no vehicle counts given")
    if any(v <= 0 for v in values):
        raise ValueError(f"vehicle counts must be positive, got {text!r}")
    return values


def _worker(handle: RunHandle):
    return run(handle)


def _execute(handles: list[RunHandle], parallel: int):
    """Run every handle; results come back in submission order regardless of
    worker count, so output files never depend on the parallelism degree."""
    if parallel <= 1 or len(handles) <= 1:
        return [run(h) for h in handles]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(_worker, handles, chunksize=1))


def _load(args) -> "ScenarioConfig":
    if args.config:
        return load_scenario(args.config)
    return default_scenario()


def _out_dir(args) -> str:
    return args.out or os.environ.get(OUT_DIR_ENV) or DEFAULT_OUT


def _summarize(reports) -> None:
    for r in reports:
        print(
            f"{r.strategy} n={r.n_vehicles} rep={r.rep} "
            f"tasks={r.total_tasks} failed={r.failed_pct:.2f}% "
            f"offloaded={r.offload_pct:.2f}%"
        )


def cmd_run(args) -> int:
    if args.strategy not in STRATEGIES:
        raise ValueError(
            f"unknown strategy {args.strategy!r}, expected one of {STRATEGIES}"
        )
    scenario = _load(args)
    n = args.vehicles if args.vehicles is not None else scenario.n_vehicles
    scenario = replace(scenario, n_vehicles=n)
    handles = [
        RunHandle(scenario, args.strategy, master_seed=args.seed, rep_index=rep)
        for rep in range(args.reps)
    ]
    reports = _execute(handles, parallel=1)
    _summarize(reports)
    runs_path, agg_path = write_csv(reports, _out_dir(args))
    print(f"wrote {runs_path} and {agg_path}")
    return 0


def cmd_sweep(args) -> int:
    scenario = _load(args)
    vehicle_counts = _parse_vehicles(args.vehicles)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    for s in strategies:
        if s not in STRATEGIES:
            raise ValueError(f"unknown strategy {s!r}, expected one of {STRATEGIES}")
    handles = [
        RunHandle(
            replace(scenario, n_vehicles=n), strat, master_seed=args.seed, rep_index=rep
        )
        for strat in strategies
        for n in vehicle_counts
        for rep in range(args.reps)
    ]
    reports = _execute(handles, parallel=args.parallel)
    runs_path, agg_path = write_csv(reports, _out_dir(args))
    print(f"{len(reports)} runs -> {runs_path}, {agg_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vecsim",
        description="Vehicular task-offloading simulator with cooperative V2V resource sharing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one strategy at one vehicle count")
    p_run.add_argument("--config", help="TOML scenario file merged over defaults")
    p_run.add_argument(
        "--strategy", required=True, help="one of " + ", ".join(STRATEGIES)
    )
    p_run.add_argument("--vehicles", type=int, help="override scenario vehicle count")
    p_run.add_argument("--reps", type=int, default=1, help="repetitions (default 1)")
    p_run.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    p_run.add_argument("--out", help=f"output dir (default ${OUT_DIR_ENV} or {DEFAULT_OUT}/)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="full strategy x vehicle-count grid")
    p_sweep.add_argument("--config", help="TOML scenario file merged over defaults")
    p_sweep.add_argument(
        "--vehicles",
        default="20:100:20",
        help="LO:HI:STEP range or comma list (default 20:100:20)",
    )
    p_sweep.add_argument(
        "--strategies",
        default=",".join(STRATEGIES),
        help="comma list (default all three)",
    )
    p_sweep.add_argument("--reps", type=int, default=10, help="repetitions per cell (default 10)")
    p_sweep.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    p_sweep.add_argument("--out", help=f"output dir (default ${OUT_DIR_ENV} or {DEFAULT_OUT}/)")
    p_sweep.add_argument(
        "--parallel",
        type=int,
        default=os.cpu_count() or 1,
        help="worker processes (default: CPU count); never changes results",
    )
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
