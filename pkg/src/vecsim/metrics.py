"""Per-run outcome counters and the CSV results writer.

Every task that reaches a terminal state after warmup is recorded exactly
once. Offload accounting is placement based: a task that was sent to the
edge/cloud stage counts as offloaded even when it later failed.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .strategy import Tier

RUNS_CSV_COLUMNS = [
    "strategy", "n_vehicles", "rep", "seed",
    "total_tasks", "failed_tasks", "failed_pct", "failed_length_gi",
    "executed_local", "executed_v2v", "executed_edge", "executed_cloud",
    "offload_pct", "offloaded_length_gi", "succeeded_length_gi",
]

AGGREGATE_CSV_COLUMNS = ["strategy", "n_vehicles", "metric", "mean", "std", "n_reps"]

AGGREGATED_METRICS = [
    "failed_pct", "failed_length_gi", "offload_pct", "offloaded_length_gi",
    "succeeded_length_gi", "total_tasks",
]


@dataclass
class MetricsReport:
    strategy: str
    n_vehicles: int
    rep: int
    seed: int
    total_tasks: int = 0
    failed_tasks: int = 0
    executed_local: int = 0
    executed_v2v: int = 0
    executed_edge: int = 0
    executed_cloud: int = 0
    offloaded_to_mec_tasks: int = 0
    failed_length_gi: float = 0.0
    offloaded_length_gi: float = 0.0
    succeeded_length_gi: float = 0.0
    _recorded: set = field(default_factory=set, repr=False)

    @property
    def failed_pct(self) -> float:
        return 100.0 * self.failed_tasks / self.total_tasks if self.total_tasks else 0.0

    @property
    def offload_pct(self) -> float:
        return (
            100.0 * self.offloaded_to_mec_tasks / self.total_tasks
            if self.total_tasks
            else 0.0
        )


_SUCCESS_COUNTER = {
    Tier.LOCAL: "executed_local",
    Tier.V2V: "executed_v2v",
    Tier.EDGE: "executed_edge",
    Tier.CLOUD: "executed_cloud",
}


def record_outcome(
    report: MetricsReport,
    task_id: int,
    length_gi: float,
    tier: Tier,
    mec_bound: bool,
    success: bool,
) -> None:
    """Fold one terminal task into the counters. Double recording is a fault."""
    if task_id in report._recorded:
        raise RuntimeError(f"task {task_id} recorded twice")
    report._recorded.add(task_id)
    report.total_tasks += 1
    if success:
        setattr(report, _SUCCESS_COUNTER[tier], getattr(report, _SUCCESS_COUNTER[tier]) + 1)
        report.succeeded_length_gi += length_gi
    else:
        report.failed_tasks += 1
        report.failed_length_gi += length_gi
    if mec_bound:
        report.offloaded_to_mec_tasks += 1
        report.offloaded_length_gi += length_gi


def run_row(report: MetricsReport) -> dict:
    return {
        "strategy": report.strategy,
        "n_vehicles": report.n_vehicles,
        "rep": report.rep,
        "seed": report.seed,
        "total_tasks": report.total_tasks,
        "failed_tasks": report.failed_tasks,
        "failed_pct": report.failed_pct,
        "failed_length_gi": report.failed_length_gi,
        "executed_local": report.executed_local,
        "executed_v2v": report.executed_v2v,
        "executed_edge": report.executed_edge,
        "executed_cloud": report.executed_cloud,
        "offload_pct": report.offload_pct,
        "offloaded_length_gi": report.offloaded_length_gi,
        "succeeded_length_gi": report.succeeded_length_gi,
    }


def finalize(reports: list[MetricsReport]) -> tuple[list[dict], list[dict]]:
    """Sorted per-run rows plus mean/sample-std aggregate rows per
    (strategy, n_vehicles, metric) cell."""
    ordered = sorted(reports, key=lambda r: (r.strategy, r.n_vehicles, r.rep))
    runs = [run_row(r) for r in ordered]

    cells: dict[tuple[str, int], list[MetricsReport]] = {}
    for r in ordered:
        cells.setdefault((r.strategy, r.n_vehicles), []).append(r)

    aggregate = []
    for (strat, n), group in sorted(cells.items()):
        for metric in sorted(AGGREGATED_METRICS):
            values = [float(getattr(r, metric)) for r in group]
            mean = float(np.mean(values))
            std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
            aggregate.append(
                {
                    "strategy": strat,
                    "n_vehicles": n,
                    "metric": metric,
                    "mean": mean,
                    "std": std,
                    "n_reps": len(values),
                }
            )
    return runs, aggregate


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_csv(reports: list[MetricsReport], out_dir: str) -> tuple[str, str]:
    """Write runs.csv and aggregate.csv; output bytes are a pure function of
    the report contents (fixed ordering, fixed float formatting)."""
    runs, aggregate = finalize(reports)
    os.makedirs(out_dir, exist_ok=True)
    runs_path = os.path.join(out_dir, "runs.csv")
    agg_path = os.path.join(out_dir, "aggregate.csv")
    with open(runs_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUNS_CSV_COLUMNS)
        for row in runs:
            w.writerow([_format(row[c]) for c in RUNS_CSV_COLUMNS])
    with open(agg_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_CSV_COLUMNS)
        for row in aggregate:
            w.writerow([_format(row[c]) for c in AGGREGATE_CSV_COLUMNS])
    return runs_path, agg_path
