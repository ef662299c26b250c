"""Deterministic discrete-event engine driving one simulation run.

Events order by (time, scheduling sequence); all randomness flows through
named substreams derived from the run parameters, so a run is a pure function
of (scenario, strategy, master_seed, rep_index).
"""

from __future__ import annotations

import zlib
from collections import defaultdict
from dataclasses import dataclass
from enum import IntEnum
from heapq import heappop, heappush
from typing import NamedTuple

import numpy as np

from . import mobility, netdelay, strategy, workload
from .compute import ComputeState
from .config import ConfigError, ScenarioConfig, validate
from .metrics import MetricsReport, record_outcome
from .strategy import STRATEGIES, Tier


class SchedulingInPastError(RuntimeError):
    """An event was scheduled before the current clock. Logic fault."""


class AccountingError(RuntimeError):
    """Reservation bookkeeping diverged from the busy counters."""


class EventKind(IntEnum):
    SIM_END = 0
    RELOCATE = 1
    RESERVATION_RELEASE = 2
    TASK_COMPLETE = 3
    PHASE_TOGGLE = 4
    TASK_ARRIVAL = 5
    CHANNEL_RELEASE = 6


class Event(NamedTuple):
    time_s: float
    seq: int
    kind: EventKind
    arg: int


class EventQueue:
    """Min-heap of events keyed (time_s, seq); seq is the global scheduling
    order, so simultaneous events dequeue in the order they were scheduled."""

    def __init__(self):
        self._heap: list[Event] = []
        self._seq = 0
        self.clock_s = 0.0
        self.scheduled = 0
        self.processed = 0

    def schedule(self, time_s: float, kind: EventKind, arg: int = -1) -> Event:
        if time_s < self.clock_s:
            raise SchedulingInPastError(
                f"event {kind.name} at {time_s} is before clock {self.clock_s}"
            )
        ev = Event(time_s, self._seq, kind, arg)
        self._seq += 1
        self.scheduled += 1
        heappush(self._heap, ev)
        return ev

    def pop(self) -> Event | None:
        if not self._heap:
            return None
        ev = heappop(self._heap)
        self.clock_s = ev.time_s
        self.processed += 1
        return ev

    def __len__(self) -> int:
        return len(self._heap)


_PURPOSES = ("placement", "apps", "mobility")


def derive_stream(
    master_seed: int, n_vehicles: int, rep_index: int, purpose: str
) -> np.random.Generator:
    """Independent substream for one purpose of one run. Any change to the
    run parameters or the purpose yields an unrelated stream.

    The strategy is deliberately not part of the key: every strategy
    compared in one (n_vehicles, rep) cell replays the identical world of
    placements, app mix, task arrivals and movements, so cross-strategy
    differences in the metrics are strategy effects, not sampling noise.
    """
    key = (n_vehicles, rep_index, zlib.crc32(purpose.encode("utf-8")))
    ss = np.random.SeedSequence(master_seed, spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class Streams:
    placement: np.random.Generator
    apps: np.random.Generator
    mobility: np.random.Generator
    # one workload stream per vehicle: a vehicle's arrival/length draws form
    # a chain untouched by how other vehicles' events interleave with it
    workload: tuple[np.random.Generator, ...]

    @classmethod
    def derive(cls, master_seed: int, n_vehicles: int, rep_index: int) -> "Streams":
        per_purpose = (
            derive_stream(master_seed, n_vehicles, rep_index, p) for p in _PURPOSES
        )
        per_vehicle = tuple(
            derive_stream(master_seed, n_vehicles, rep_index, f"workload.{vid}")
            for vid in range(n_vehicles)
        )
        return cls(*per_purpose, per_vehicle)


@dataclass(frozen=True)
class RunHandle:
    scenario: ScenarioConfig
    strategy: str
    master_seed: int = 0
    rep_index: int = 0


class _Flight:
    """One in-flight task: its reservations and the vehicles whose relocation
    kills it."""

    __slots__ = ("task", "decision", "reservations", "watchers")

    def __init__(self, task, decision, reservations, watchers):
        self.task = task
        self.decision = decision
        self.reservations = reservations
        self.watchers = watchers


class Simulation:
    """State of one run. Use run() (module level) unless a test needs to
    inject streams or poke at internals."""

    def __init__(
        self,
        scenario: ScenarioConfig,
        strat: str,
        streams: Streams,
        master_seed: int = 0,
        rep_index: int = 0,
        check_invariants: bool = False,
    ):
        violations = validate(scenario)
        if violations:
            raise ConfigError(violations)
        if strat not in STRATEGIES:
            raise ValueError(f"unknown strategy {strat!r}, expected one of {STRATEGIES}")
        self.scenario = scenario
        self.strategy = strat
        self.streams = streams
        self.check_invariants = check_invariants
        self.queue = EventQueue()
        self.lmap = mobility.build_location_map(scenario.mobility)
        self.compute = ComputeState(
            scenario.compute, scenario.n_vehicles, scenario.game.initial_give_willingness
        )
        self.compute.add_edge_servers(len(self.lmap))
        self.co_located: list[set[int]] = [set() for _ in range(len(self.lmap))]
        # coalition transfers currently occupying each location's ad-hoc channel
        self.v2v_active: list[int] = [0] * len(self.lmap)
        self.flights: dict[int, _Flight] = {}
        # vehicle id -> ids of in-flight tasks its relocation would kill
        self.deps: dict[int, set[int]] = defaultdict(set)
        self.report = MetricsReport(
            strategy=strat,
            n_vehicles=scenario.n_vehicles,
            rep=rep_index,
            seed=master_seed,
        )
        self._task_seq = 0

        # end marker first so nothing at exactly sim_duration_s runs after it
        self.queue.schedule(scenario.sim_duration_s, EventKind.SIM_END)
        placements = mobility.initial_placement(
            scenario.n_vehicles, self.lmap, streams.placement
        )
        for p in placements:
            self.compute.vehicles[p.vehicle_id].location_id = p.location_id
            self.co_located[p.location_id].add(p.vehicle_id)
            self.queue.schedule(p.dwell_until_s, EventKind.RELOCATE, p.vehicle_id)
        self.bindings = workload.assign_apps(
            scenario.n_vehicles, list(scenario.apps.values()), streams.apps
        )
        for binding in self.bindings:
            self._schedule_workload(binding)

    @property
    def clock(self) -> float:
        return self.queue.clock_s

    # resource helpers used by the strategy layer; every reservation gets a
    # matching release event at its deadline

    def reserve_vehicle(self, vehicle_id, amount, task_id, release_at_s):
        r = self.compute.reserve_vehicle(vehicle_id, amount, task_id, release_at_s)
        self.queue.schedule(release_at_s, EventKind.RESERVATION_RELEASE, r.reservation_id)
        return r

    def reserve_edge(self, es_id, vm_utilization_pct, task_id, release_at_s):
        r = self.compute.reserve_edge(es_id, vm_utilization_pct, task_id, release_at_s)
        self.queue.schedule(release_at_s, EventKind.RESERVATION_RELEASE, r.reservation_id)
        return r

    def v2v_rate_at(self, location_id: int) -> float:
        """Per-transfer share of the location's ad-hoc channel right now.

        Transfers already in flight keep the rate they started with; a new
        one gets an equal split against them. With sharing disabled every
        transfer sees the nominal rate.
        """
        net = self.scenario.net
        if not net.v2v_channel_sharing:
            return net.v2v_rate_mbps
        return net.v2v_rate_mbps / (1.0 + self.v2v_active[location_id])

    def run(self) -> MetricsReport:
        dispatch = {
            EventKind.RELOCATE: self._on_relocate,
            EventKind.RESERVATION_RELEASE: self.compute.release,
            EventKind.TASK_COMPLETE: self._on_task_complete,
            EventKind.PHASE_TOGGLE: self._on_phase_toggle,
            EventKind.TASK_ARRIVAL: self._on_task_arrival,
            EventKind.CHANNEL_RELEASE: self._on_channel_release,
        }
        check = self.check_invariants
        while True:
            ev = self.queue.pop()
            if ev is None or ev.kind == EventKind.SIM_END:
                break
            if check:
                self.compute.touched.clear()
            dispatch[ev.kind](ev.arg)
            if check:
                problems = self.compute.verify_touched(self.clock)
                if problems:
                    raise AccountingError("; ".join(problems))
        if check:
            problems = self.compute.verify_all(self.clock)
            if problems:
                raise AccountingError("; ".join(problems))
        # no event is ever lost: everything scheduled was processed or is
        # still queued past the end marker
        assert self.queue.processed + len(self.queue) == self.queue.scheduled
        return self.report

    # event handlers

    def _schedule_workload(self, binding) -> None:
        stream = self.streams.workload[binding.vehicle_id]
        kind, t = workload.next_event(binding, self.clock, stream)
        if kind == workload.ARRIVAL:
            self.queue.schedule(t, EventKind.TASK_ARRIVAL, binding.vehicle_id)
        else:
            self.queue.schedule(t, EventKind.PHASE_TOGGLE, binding.vehicle_id)

    def _on_task_arrival(self, vehicle_id: int) -> None:
        binding = self.bindings[vehicle_id]
        task = workload.materialize_task(
            binding, self._task_seq, self.clock, self.streams.workload[vehicle_id]
        )
        self._task_seq += 1
        decision, reservations = strategy.place_task(self, task)
        if decision.tier is Tier.FAILED:
            self._record(task, decision, success=False)
        else:
            if decision.tier is Tier.V2V:
                # the coalition occupies the channel where it was formed for
                # the payload's nominal airtime; the extra latency concurrent
                # transfers experience models backoff, not extra airtime
                loc = self.compute.vehicles[task.vehicle_id].location_id
                hold_s = netdelay.transfer_s(
                    task.profile.upload_kb + task.profile.download_kb,
                    self.scenario.net.v2v_rate_mbps,
                )
                self.v2v_active[loc] += 1
                self.queue.schedule(
                    self.clock + hold_s, EventKind.CHANNEL_RELEASE, loc
                )
            watchers = self._watchers(task, decision)
            flight = _Flight(task, decision, reservations, watchers)
            self.flights[task.task_id] = flight
            for w in watchers:
                self.deps[w].add(task.task_id)
            self.queue.schedule(
                self.clock + decision.delay.total_s, EventKind.TASK_COMPLETE, task.task_id
            )
        self._schedule_workload(binding)

    def _watchers(self, task, decision) -> tuple[int, ...]:
        """Vehicles whose relocation kills this task. Local tasks ride along
        with their host; edge/cloud tasks die with the owner's AP link."""
        if decision.tier in (Tier.EDGE, Tier.CLOUD):
            return (task.vehicle_id,)
        if decision.tier is Tier.V2V:
            mode = self.scenario.v2v_relocation_failure
            if mode == "owner":
                return (task.vehicle_id,)
            if mode == "any-member":
                return (task.vehicle_id,) + tuple(
                    m.vehicle_id for m in decision.coalition.members
                )
        return ()

    def _on_channel_release(self, location_id: int) -> None:
        self.v2v_active[location_id] -= 1
        if self.v2v_active[location_id] < 0:
            raise AccountingError(f"channel count below zero at location {location_id}")

    def _on_phase_toggle(self, vehicle_id: int) -> None:
        binding = self.bindings[vehicle_id]
        if binding.active:
            binding.active = False
            binding.phase_until_s = self.clock + binding.profile.idle_period_s
            self.queue.schedule(binding.phase_until_s, EventKind.PHASE_TOGGLE, vehicle_id)
        else:
            binding.active = True
            binding.phase_until_s = self.clock + binding.profile.active_period_s
            self._schedule_workload(binding)

    def _on_task_complete(self, task_id: int) -> None:
        flight = self.flights.pop(task_id, None)
        if flight is None:
            return  # the task already failed; stale completion
        for r in flight.reservations:
            self.compute.release(r.reservation_id)
        for w in flight.watchers:
            self.deps[w].discard(task_id)
        self._record(flight.task, flight.decision, success=True)

    def _on_relocate(self, vehicle_id: int) -> None:
        v = self.compute.vehicles[vehicle_id]
        old = v.location_id
        placement = mobility.relocate(
            vehicle_id, old, self.lmap, self.streams.mobility, self.clock
        )
        if placement.location_id != old:
            for task_id in sorted(self.deps[vehicle_id]):
                self._fail_flight(task_id)
            self.co_located[old].discard(vehicle_id)
            self.co_located[placement.location_id].add(vehicle_id)
            v.location_id = placement.location_id
        self.queue.schedule(placement.dwell_until_s, EventKind.RELOCATE, vehicle_id)

    def _fail_flight(self, task_id: int) -> None:
        flight = self.flights.pop(task_id)
        for r in flight.reservations:
            self.compute.release(r.reservation_id)
        for w in flight.watchers:
            self.deps[w].discard(task_id)
        self._record(flight.task, flight.decision, success=False)

    def _record(self, task, decision, success: bool) -> None:
        if self.clock < self.scenario.warmup_s:
            return  # terminal inside warmup: excluded from the report
        record_outcome(
            self.report,
            task.task_id,
            task.length_gi,
            decision.tier,
            decision.mec_bound,
            success,
        )


def run(handle: RunHandle, check_invariants: bool = False) -> MetricsReport:
    """Execute one run to completion. Deterministic in the handle."""
    streams = Streams.derive(
        handle.master_seed, handle.scenario.n_vehicles, handle.rep_index
    )
    sim = Simulation(
        handle.scenario,
        handle.strategy,
        streams,
        master_seed=handle.master_seed,
        rep_index=handle.rep_index,
        check_invariants=check_invariants,
    )
    return sim.run()
