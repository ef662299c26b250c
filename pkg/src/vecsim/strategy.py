"""Placement strategies: where a freshly arrived task executes.

All strategies try on-board execution first. The cooperative ones then try to
pool spare CPU from co-located neighbors: "airs" takes every candidate's whole
spare, "pirs" runs a pairwise bargain per candidate so helpers keep a share of
their spare proportional to their bargaining power. Whatever cannot meet its
deadline nearby goes to the edge server, then to the cloud, and a task whose
best remaining tier still misses the deadline fails on the spot.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import game, netdelay
from .compute import EPS, Reservation, VehicleState
from .workload import TaskSpec

NCS = "ncs"
AIRS = "airs"
PIRS = "pirs"
STRATEGIES = (NCS, AIRS, PIRS)


class Tier(Enum):
    LOCAL = "local"
    V2V = "v2v"
    EDGE = "edge"
    CLOUD = "cloud"
    FAILED = "failed"


@dataclass(frozen=True)
class CoalitionMember:
    vehicle_id: int
    contribution_gips: float


@dataclass(frozen=True)
class Coalition:
    owner_id: int
    members: tuple[CoalitionMember, ...]
    owner_share_gips: float  # the owner's own spare committed to the pool
    pooled_gips: float


@dataclass(frozen=True)
class PlacementDecision:
    tier: Tier
    delay: netdelay.DelayEstimate
    # True when the decision reached the edge/cloud stage; failed tasks keep
    # the flag so offload accounting counts them as sent upstream
    mec_bound: bool = False
    coalition: Coalition | None = None
    es_id: int | None = None


def candidate_utility(vehicle: VehicleState, game_cfg) -> float:
    """Score a potential helper: its value as a partner who gives resources
    while the owner gets them, discounted by how risky the helper looks."""
    total = vehicle.base_gips + vehicle.acquired_gips
    p_risky = vehicle.busy_gips / total + (
        vehicle.willingness_give - vehicle.willingness_get
    )
    p_risky = min(1.0, max(0.0, p_risky))
    row = game_cfg.state_weight[game.GIVE]
    helper_reward = game_cfg.action_payoff[game.GIVE][game.GET]
    return (row[0] * p_risky + row[1] * (1.0 - p_risky)) * helper_reward


def build_candidates(sim, owner_id: int) -> list[tuple[float, int]]:
    """Rank co-located vehicles with spare capacity as helper candidates.

    Returns (utility, vehicle_id) pairs, best first; equal utilities prefer
    the idler vehicle, then the lower id. Candidates scoring below the
    configured floor drop.
    """
    compute = sim.compute
    game_cfg = sim.scenario.game
    floor = game_cfg.candidate_utility_min
    owner_loc = compute.vehicles[owner_id].location_id
    out = []
    for vid in sim.co_located[owner_loc]:
        if vid == owner_id or compute.spare(vid) <= 0.0:
            continue
        u = candidate_utility(compute.vehicles[vid], game_cfg)
        if u < floor:
            continue
        out.append((u, vid, compute.busy_share(vid)))
    out.sort(key=lambda triple: (-triple[0], triple[2], triple[1]))
    return [(u, vid) for u, vid, _ in out]


def _mark_cooperation(vehicle: VehicleState, counterpart_action: int, game_cfg) -> None:
    """Shift a participant's willingness from the round it just played and
    remember the per-action rewards for the next round."""
    now = game.pure_action_rewards(game_cfg.action_payoff, counterpart_action)
    updated = game.update_willingness(
        (vehicle.willingness_give, vehicle.willingness_get),
        now,
        (vehicle.last_reward_give, vehicle.last_reward_get),
        game_cfg.learning_rate,
    )
    vehicle.willingness_give, vehicle.willingness_get = updated
    vehicle.last_reward_give, vehicle.last_reward_get = now


def form_coalition_airs(sim, owner_id: int, candidates: list[tuple[float, int]]) -> Coalition:
    """Every selected candidate contributes its whole spare."""
    compute = sim.compute
    limit = sim.scenario.compute.max_coalition_helpers
    owner_share = compute.spare(owner_id)
    members = []
    pooled = owner_share
    for _, vid in candidates[:limit]:
        contribution = compute.spare(vid)
        members.append(CoalitionMember(vid, contribution))
        pooled += contribution
    return Coalition(owner_id, tuple(members), owner_share, pooled)


def form_coalition_pirs(sim, owner_id: int, candidates: list[tuple[float, int]]) -> Coalition:
    """Bargain a share of each selected helper's spare capacity.

    The owner keeps its own spare outright; only the helpers' idle capacity
    is on the table. Each helper cedes the owner's bargaining-power share of
    its spare and keeps the rest (unlike the take-everything strategy), with
    the owner's power set by its get-willingness against the helpers' mean.
    Every contributing party updates its willingness from the round.
    """
    compute = sim.compute
    game_cfg = sim.scenario.game
    limit = sim.scenario.compute.max_coalition_helpers
    owner = compute.vehicles[owner_id]
    owner_share = compute.spare(owner_id)
    selected = candidates[:limit]
    if not selected:
        return Coalition(owner_id, (), owner_share, owner_share)
    helper_ids = [vid for _, vid in selected]
    mean_get = sum(compute.vehicles[vid].willingness_get for vid in helper_ids) / len(helper_ids)
    owner_power = game.bargaining_power(owner.willingness_get, mean_get)
    members = []
    for vid in helper_ids:
        contribution = owner_power * compute.spare(vid)
        if contribution > EPS:
            members.append(CoalitionMember(vid, contribution))
            _mark_cooperation(compute.vehicles[vid], game.GET, game_cfg)
    if members:
        _mark_cooperation(owner, game.GIVE, game_cfg)
    pooled = owner_share + sum(m.contribution_gips for m in members)
    return Coalition(owner_id, tuple(members), owner_share, pooled)


def place_task(sim, task: TaskSpec) -> tuple[PlacementDecision, list[Reservation]]:
    """Pick the execution tier for a task and commit the needed resources.

    Reservations are created only for the tier actually chosen; a task that
    reaches the edge/cloud stage and still misses its deadline fails without
    holding anything.
    """
    profile = task.profile
    tolerance = profile.delay_tolerance_s
    owner_id = task.vehicle_id
    compute = sim.compute
    now = sim.clock

    own_spare = compute.spare(owner_id)
    d_local = netdelay.local_delay(task.length_gi, own_spare)
    if d_local.total_s <= tolerance:
        # on-board execution dedicates the whole current spare
        r = sim.reserve_vehicle(owner_id, own_spare, task.task_id, now + d_local.total_s)
        return PlacementDecision(Tier.LOCAL, d_local), [r]

    if sim.strategy != NCS:
        candidates = build_candidates(sim, owner_id)
        if candidates:
            if sim.strategy == AIRS:
                coalition = form_coalition_airs(sim, owner_id, candidates)
            else:
                coalition = form_coalition_pirs(sim, owner_id, candidates)
            if coalition.pooled_gips > EPS:
                v2v_rate = sim.v2v_rate_at(compute.vehicles[owner_id].location_id)
                d_v2v = netdelay.v2v_delay(
                    task.length_gi,
                    coalition.pooled_gips,
                    profile.upload_kb,
                    profile.download_kb,
                    v2v_rate,
                )
                if d_v2v.total_s <= tolerance:
                    # members commit for the input's nominal airtime plus the
                    # compute window; contention backoff delays the task but
                    # does not extend the members' dedication
                    upload_s = netdelay.transfer_s(
                        profile.upload_kb, sim.scenario.net.v2v_rate_mbps
                    )
                    compute_end = now + upload_s + d_v2v.compute_s
                    reservations = []
                    if coalition.owner_share_gips > EPS:
                        reservations.append(
                            sim.reserve_vehicle(
                                owner_id, coalition.owner_share_gips, task.task_id, compute_end
                            )
                        )
                    for m in coalition.members:
                        reservations.append(
                            sim.reserve_vehicle(
                                m.vehicle_id, m.contribution_gips, task.task_id, compute_end
                            )
                        )
                    return (
                        PlacementDecision(Tier.V2V, d_v2v, coalition=coalition),
                        reservations,
                    )

    # edge/cloud stage: from here on the task counts as offloaded upstream
    es_id = compute.vehicles[owner_id].location_id
    net = sim.scenario.net
    ccfg = sim.scenario.compute
    if compute.edge_headroom_ok(es_id, profile.vm_utilization_pct):
        # a loaded server computes slower: each admitted task gets the rate
        # left free by the VMs already running when it arrives
        free = 1.0 - compute.edges[es_id].utilization_pct / 100.0
        d_edge = netdelay.edge_delay(
            task.length_gi, ccfg.edge_gips * max(free, 0.0), profile.upload_kb,
            profile.download_kb, net.v2i_rate_mbps,
        )
        if d_edge.total_s <= tolerance:
            r = sim.reserve_edge(
                es_id, profile.vm_utilization_pct, task.task_id, now + d_edge.total_s
            )
            return (
                PlacementDecision(Tier.EDGE, d_edge, mec_bound=True, es_id=es_id),
                [r],
            )
        return PlacementDecision(Tier.FAILED, d_edge, mec_bound=True, es_id=es_id), []
    d_cloud = netdelay.cloud_delay(
        task.length_gi, ccfg.cloud_gips, profile.upload_kb, profile.download_kb,
        net.v2i_rate_mbps, net.wan_rate_mbps,
    )
    if d_cloud.total_s <= tolerance:
        return PlacementDecision(Tier.CLOUD, d_cloud, mec_bound=True), []
    return PlacementDecision(Tier.FAILED, d_cloud, mec_bound=True), []
