"""Cooperation game primitives for V2V resource sharing.

Vehicles negotiating spare CPU play a two-action game (GIVE resources to a
neighbor, or GET resources from it). Each vehicle carries a willingness pair
over those actions that shifts with experience; willingness to GET doubles as
bargaining weight when a shared pool is split. The split itself is the
asymmetric Nash bargaining solution over the pooled capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

Matrix2 = tuple[tuple[float, float], tuple[float, float]]

GIVE = 0
GET = 1


class DegenerateCapacityError(ValueError):
    """Risk was requested for a party with no compute capacity at all."""


class InfeasibleBargainError(ValueError):
    """The pool to split cannot cover the parties' existing workloads."""


@dataclass(frozen=True)
class RiskVector:
    """Probability a party is a risky (over-committed) cooperation partner.

    Components sum to 1. Risk grows with the party's load fraction and with a
    give-heavy willingness pair (an eager giver is more likely to be stretched
    thin when the work actually runs).
    """

    p_risky: float
    p_safe: float


@dataclass(frozen=True)
class BargainOutcome:
    """Result of splitting a pooled capacity among parties."""

    allocations: tuple[float, ...]


def risk_vector(
    busy_gips: float,
    total_gips: float,
    willingness_give: float,
    willingness_get: float,
) -> RiskVector:
    if total_gips <= 0.0:
        raise DegenerateCapacityError(f"total capacity must be > 0, got {total_gips}")
    p = busy_gips / total_gips + (willingness_give - willingness_get)
    p = min(1.0, max(0.0, p))
    return RiskVector(p, 1.0 - p)


def action_reward(
    own: Sequence[float],
    payoff: Matrix2,
    counterpart: Sequence[float],
) -> float:
    """Expected payoff of an action distribution against the counterpart's.

    Bilinear form: sum over action pairs (m, n) of own[m] * payoff[m][n] *
    counterpart[n].
    """
    return sum(
        own[m] * payoff[m][n] * counterpart[n]
        for m in (GIVE, GET)
        for n in (GIVE, GET)
    )


def pure_action_rewards(payoff: Matrix2, counterpart_action: int) -> tuple[float, float]:
    """Per-action rewards (for GIVE, for GET) against a committed counterpart."""
    col = counterpart_action
    return (payoff[GIVE][col], payoff[GET][col])


def utility(
    risk: RiskVector,
    state_weight: Matrix2,
    reward: float,
    own_action: int,
) -> float:
    """Value of playing own_action against a partner in the given risk state.

    The chosen action's row of state_weight scores the partner's (risky, safe)
    state estimate; the score scales the action reward.
    """
    row = state_weight[own_action]
    return (row[0] * risk.p_risky + row[1] * risk.p_safe) * reward


def bargaining_power(get_willingness_i: float, get_willingness_j: float) -> float:
    """Party i's share weight in a two-party bargain; weights sum to 1 across
    the pair. Two fully unwilling getters split evenly."""
    denom = get_willingness_i + get_willingness_j
    if denom <= 0.0:
        return 0.5
    return get_willingness_i / denom


def anbs_allocate(
    busy: Sequence[float],
    powers: Sequence[float],
    total: float,
) -> BargainOutcome:
    """Split a capacity pool so each party keeps its workload floor and the
    surplus divides in proportion to bargaining power.

    This closed form is the unique maximizer of the product of per-party
    surpluses raised to their powers, over allocations that sum to the pool
    and cover every party's busy floor.
    """
    if len(busy) != len(powers) or not busy:
        raise ValueError("busy and powers must be equal-length, non-empty")
    if any(b < 0 for b in busy):
        raise ValueError("busy workloads must be >= 0")
    if any(p < 0 for p in powers):
        raise ValueError("bargaining powers must be >= 0")
    if abs(sum(powers) - 1.0) > 1e-6:
        raise ValueError(f"bargaining powers must sum to 1, got {sum(powers)}")
    floor = sum(busy)
    if total < floor - 1e-9:
        raise InfeasibleBargainError(
            f"pool {total} cannot cover combined workload {floor}"
        )
    surplus = max(0.0, total - floor)
    return BargainOutcome(tuple(b + p * surplus for b, p in zip(busy, powers)))


def update_willingness(
    willingness: tuple[float, float],
    reward_now: tuple[float, float],
    reward_prev: tuple[float, float],
    learning_rate: float,
) -> tuple[float, float]:
    """Shift a willingness pair toward the action whose reward improved most.

    Per-action reward deltas against the previous cooperation round are
    normalized by their sum; a non-positive or non-finite normalizer means the
    round carries no usable signal and the pair is unchanged. The stepped pair
    is clamped to [0, 1] per component and renormalized to sum 1.
    """
    d_give = reward_now[GIVE] - reward_prev[GIVE]
    d_get = reward_now[GET] - reward_prev[GET]
    denom = d_give + d_get
    if not (math.isfinite(d_give) and math.isfinite(d_get)) or denom <= 0.0:
        step_give = step_get = 0.0
    else:
        step_give = d_give / denom
        step_get = d_get / denom
    raw_give = willingness[GIVE] + learning_rate * step_give
    raw_get = willingness[GET] + learning_rate * step_get
    give = min(1.0, max(0.0, raw_give))
    get = min(1.0, max(0.0, raw_get))
    s = give + get
    if s <= 0.0:
        return willingness
    return (give / s, get / s)
