"""Per-vehicle application bindings and stochastic task generation.

Each vehicle runs exactly one application that alternates fixed active/idle
periods starting active at t=0. Tasks arrive only while active, with
exponential gaps; a gap that crosses the phase boundary yields no task (the
arrival is discarded, not deferred past the idle phase).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import AppProfile

ARRIVAL = "arrival"
TOGGLE = "toggle"


@dataclass(slots=True)
class AppBinding:
    vehicle_id: int
    profile: AppProfile
    active: bool = True
    phase_until_s: float = 0.0


@dataclass(frozen=True)
class TaskSpec:
    task_id: int
    vehicle_id: int
    profile: AppProfile
    length_gi: float
    created_s: float


def assign_apps(
    n_vehicles: int, profiles: Sequence[AppProfile], rng: np.random.Generator
) -> list[AppBinding]:
    """Assign one application per vehicle, matching the usage percentages
    exactly (largest-remainder rounding) and shuffling who gets what.

    Exact-share assignment keeps the fleet mix identical across repetitions,
    so differences between runs reflect strategy and timing rather than
    which applications happened to be drawn.
    """
    weights = np.array([p.usage_pct for p in profiles], dtype=float)
    shares = weights / weights.sum() * n_vehicles
    counts = np.floor(shares).astype(int)
    remainder = n_vehicles - int(counts.sum())
    if remainder > 0:
        # hand leftovers to the largest fractional shares, earlier profile wins ties
        order = sorted(range(len(profiles)), key=lambda i: (-(shares[i] - counts[i]), i))
        for i in order[:remainder]:
            counts[i] += 1
    assignment = np.repeat(np.arange(len(profiles)), counts)
    picks = rng.permutation(assignment)
    out = []
    for vid in range(n_vehicles):
        profile = profiles[int(picks[vid])]
        out.append(
            AppBinding(vid, profile, active=True, phase_until_s=profile.active_period_s)
        )
    return out


def next_event(
    binding: AppBinding, now_s: float, rng: np.random.Generator
) -> tuple[str, float]:
    """Next workload event for an active binding: the upcoming arrival, or the
    phase toggle when the drawn gap crosses the active-phase boundary."""
    gap = rng.exponential(binding.profile.interarrival_mean_s)
    t = now_s + gap
    if t > binding.phase_until_s:
        return (TOGGLE, binding.phase_until_s)
    return (ARRIVAL, t)


def materialize_task(
    binding: AppBinding, task_id: int, now_s: float, rng: np.random.Generator
) -> TaskSpec:
    length = float(rng.exponential(binding.profile.task_length_mean_gi))
    return TaskSpec(task_id, binding.vehicle_id, binding.profile, length, now_s)
