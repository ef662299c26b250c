"""Mutable compute-resource state: vehicle CPUs, edge servers, reservations.

Every GIPS or VM-share commitment is a Reservation with a release deadline;
busy counters move only through reserve/release so the accounting can be
audited at any event boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import ComputeConfig

EPS = 1e-9


class CapacityError(RuntimeError):
    """A reservation exceeded the host's spare. Indicates a logic fault."""


@dataclass(slots=True)
class VehicleState:
    vehicle_id: int
    base_gips: float
    busy_gips: float = 0.0
    # capacity granted by neighbors; transient, lives only inside one bargain
    acquired_gips: float = 0.0
    willingness_give: float = 0.5
    willingness_get: float = 0.5
    last_reward_give: float = 0.0
    last_reward_get: float = 0.0
    location_id: int = 0


@dataclass(slots=True)
class EdgeServerState:
    es_id: int
    location_id: int
    capacity_gips: float
    utilization_pct: float = 0.0
    running: set = field(default_factory=set)


@dataclass(slots=True)
class Reservation:
    reservation_id: int
    host_kind: str  # "vehicle" or "edge"
    host_id: int
    amount: float   # GIPS on vehicles, utilization percent on edge servers
    task_id: int
    release_at_s: float
    released: bool = False


class ComputeState:
    """Owns all vehicles, edge servers and live reservations of one run."""

    def __init__(self, cfg: ComputeConfig, n_vehicles: int, initial_give_willingness: float):
        self.cfg = cfg
        init_give = initial_give_willingness
        self.vehicles = [
            VehicleState(
                vehicle_id=i,
                base_gips=cfg.vehicle_gips,
                willingness_give=init_give,
                willingness_get=1.0 - init_give,
            )
            for i in range(n_vehicles)
        ]
        self.edges: list[EdgeServerState] = []
        self.reservations: dict[int, Reservation] = {}
        self._next_id = 0
        self._live_v: list[set[int]] = [set() for _ in range(n_vehicles)]
        self._live_e: list[set[int]] = []
        # hosts mutated since the caller last cleared this; drives audits
        self.touched: set[tuple[str, int]] = set()

    def add_edge_servers(self, n_locations: int) -> None:
        self.edges = [
            EdgeServerState(es_id=i, location_id=i, capacity_gips=self.cfg.edge_gips)
            for i in range(n_locations)
        ]
        self._live_e = [set() for _ in range(n_locations)]

    def spare(self, vehicle_id: int) -> float:
        v = self.vehicles[vehicle_id]
        s = v.base_gips + v.acquired_gips - v.busy_gips
        return s if s > EPS else 0.0

    def busy_share(self, vehicle_id: int) -> float:
        v = self.vehicles[vehicle_id]
        total = v.base_gips + v.acquired_gips
        return v.busy_gips / total if total > 0.0 else 1.0

    def reserve_vehicle(
        self, vehicle_id: int, amount: float, task_id: int, release_at_s: float
    ) -> Reservation:
        if amount <= 0.0:
            raise CapacityError(f"reservation amount must be > 0, got {amount}")
        if amount > self.spare(vehicle_id) + EPS:
            raise CapacityError(
                f"vehicle {vehicle_id}: reserving {amount} GIPS over spare {self.spare(vehicle_id)}"
            )
        r = self._new("vehicle", vehicle_id, amount, task_id, release_at_s)
        self.vehicles[vehicle_id].busy_gips += amount
        self._live_v[vehicle_id].add(r.reservation_id)
        self.touched.add(("vehicle", vehicle_id))
        return r

    def edge_headroom_ok(self, es_id: int, vm_utilization_pct: float) -> bool:
        """Admission check: accept only while the added VM share stays under
        the utilization threshold."""
        current = self.edges[es_id].utilization_pct
        return current + vm_utilization_pct < self.cfg.edge_utilization_threshold_pct

    def reserve_edge(
        self, es_id: int, vm_utilization_pct: float, task_id: int, release_at_s: float
    ) -> Reservation:
        r = self._new("edge", es_id, vm_utilization_pct, task_id, release_at_s)
        es = self.edges[es_id]
        es.utilization_pct += vm_utilization_pct
        es.running.add(task_id)
        self._live_e[es_id].add(r.reservation_id)
        self.touched.add(("edge", es_id))
        return r

    def release(self, reservation_id: int) -> None:
        """Idempotent: releasing twice (deadline event after an early failure
        release) is a no-op."""
        r = self.reservations.get(reservation_id)
        if r is None or r.released:
            return
        r.released = True
        if r.host_kind == "vehicle":
            v = self.vehicles[r.host_id]
            v.busy_gips -= r.amount
            live = self._live_v[r.host_id]
            live.discard(reservation_id)
            if not live:
                v.busy_gips = 0.0  # kill float dust once nothing is held
            self.touched.add(("vehicle", r.host_id))
        else:
            es = self.edges[r.host_id]
            es.utilization_pct -= r.amount
            es.running.discard(r.task_id)
            live = self._live_e[r.host_id]
            live.discard(reservation_id)
            if not live:
                es.utilization_pct = 0.0
            self.touched.add(("edge", r.host_id))
        del self.reservations[reservation_id]

    def _new(self, kind: str, host_id: int, amount: float, task_id: int, release_at_s: float) -> Reservation:
        r = Reservation(self._next_id, kind, host_id, amount, task_id, release_at_s)
        self._next_id += 1
        self.reservations[r.reservation_id] = r
        return r

    # audit helpers

    def verify_host(self, kind: str, host_id: int, now_s: float) -> list[str]:
        problems = []
        if kind == "vehicle":
            v = self.vehicles[host_id]
            held = sum(self.reservations[i].amount for i in self._live_v[host_id])
            if abs(v.busy_gips - held) > 1e-9:
                problems.append(
                    f"vehicle {host_id}: busy {v.busy_gips} != held {held}"
                )
            if v.busy_gips < -1e-9 or v.busy_gips > v.base_gips + v.acquired_gips + 1e-9:
                problems.append(f"vehicle {host_id}: busy {v.busy_gips} out of range")
            ids = self._live_v[host_id]
        else:
            es = self.edges[host_id]
            held = sum(self.reservations[i].amount for i in self._live_e[host_id])
            if abs(es.utilization_pct - held) > 1e-9:
                problems.append(
                    f"edge {host_id}: utilization {es.utilization_pct} != held {held}"
                )
            if es.utilization_pct < -1e-9 or es.utilization_pct > 100.0 + 1e-9:
                problems.append(f"edge {host_id}: utilization {es.utilization_pct} out of range")
            ids = self._live_e[host_id]
        for i in ids:
            if self.reservations[i].release_at_s < now_s - 1e-9:
                problems.append(f"reservation {i} outlived its deadline")
        return problems

    def verify_touched(self, now_s: float) -> list[str]:
        problems = []
        for kind, host_id in self.touched:
            problems.extend(self.verify_host(kind, host_id, now_s))
        return problems

    def verify_all(self, now_s: float) -> list[str]:
        problems = []
        for v in self.vehicles:
            problems.extend(self.verify_host("vehicle", v.vehicle_id, now_s))
        for es in self.edges:
            problems.extend(self.verify_host("edge", es.es_id, now_s))
        return problems
