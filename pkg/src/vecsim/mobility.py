"""Nomadic mobility over a ring of locations with exponential dwell times.

Locations are laid out in type order; each hosts one roadside AP with an
attached edge server. A vehicle dwells, then hops to one of the two ring
neighbors chosen uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import MobilityConfig


@dataclass(frozen=True)
class Location:
    location_id: int
    loc_type: int  # 1-based type index, lower types keep vehicles longer
    dwell_mean_s: float


@dataclass(frozen=True)
class LocationMap:
    locations: tuple[Location, ...]

    def __len__(self) -> int:
        return len(self.locations)

    def neighbors(self, location_id: int) -> tuple[int, int]:
        n = len(self.locations)
        return ((location_id - 1) % n, (location_id + 1) % n)


@dataclass(frozen=True)
class Placement:
    vehicle_id: int
    location_id: int
    dwell_until_s: float


def build_location_map(cfg: MobilityConfig) -> LocationMap:
    locations = []
    for type_index, (count, dwell) in enumerate(zip(cfg.location_counts, cfg.dwell_mean_s)):
        for _ in range(count):
            locations.append(Location(len(locations), type_index + 1, dwell))
    return LocationMap(tuple(locations))


def sample_dwell(location: Location, rng: np.random.Generator) -> float:
    return float(rng.exponential(location.dwell_mean_s))


def initial_placement(
    n_vehicles: int, lmap: LocationMap, rng: np.random.Generator
) -> list[Placement]:
    """Uniform initial spread; one (location, dwell) draw pair per vehicle in
    vehicle-id order."""
    out = []
    n_loc = len(lmap)
    for vid in range(n_vehicles):
        loc = int(rng.integers(0, n_loc))
        out.append(Placement(vid, loc, sample_dwell(lmap.locations[loc], rng)))
    return out


def relocate(
    vehicle_id: int,
    current_location_id: int,
    lmap: LocationMap,
    rng: np.random.Generator,
    now_s: float,
) -> Placement:
    """Hop to a uniformly chosen ring neighbor and draw the next dwell there."""
    left, right = lmap.neighbors(current_location_id)
    new_loc = left if int(rng.integers(0, 2)) == 0 else right
    return Placement(
        vehicle_id, new_loc, now_s + sample_dwell(lmap.locations[new_loc], rng)
    )
