"""Scenario configuration: typed defaults, TOML loading, validation.

All dataclasses are frozen; a loaded scenario never changes during a run.
Fields suffixed _pct hold percent values (30.0 means 30%), _s seconds,
_kb kilobytes, _gi giga-instructions, _gips giga-instructions per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import tomli
import toml

Matrix2 = tuple[tuple[float, float], tuple[float, float]]


class ConfigError(ValueError):
    """Raised when a scenario fails validation. Carries the violation list."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid scenario: " + "; ".join(violations))


@dataclass(frozen=True)
class AppProfile:
    """One vehicular application type and its workload shape."""

    name: str
    usage_pct: float            # share of vehicles running this app
    interarrival_mean_s: float  # mean task gap while the app is active
    delay_tolerance_s: float    # a task exceeding this deadline fails
    active_period_s: float
    idle_period_s: float
    upload_kb: float
    download_kb: float
    task_length_mean_gi: float
    vm_utilization_pct: float   # edge VM share one task of this app occupies


@dataclass(frozen=True)
class NetworkConfig:
    """Link rates plus the ad-hoc channel sharing switch.

    The vehicle-to-vehicle rate is the capacity of one location's shared
    ad-hoc channel. With v2v_channel_sharing on, concurrent coalition
    transfers at a location split that capacity equally, so the per-task
    rate is v2v_rate_mbps / (1 + transfers already in flight there).
    Infrastructure links (v2i, wan) are provisioned per location and do
    not contend.
    """

    v2v_rate_mbps: float = 10.0
    v2i_rate_mbps: float = 250.0
    wan_rate_mbps: float = 1000.0
    v2v_channel_sharing: bool = True


@dataclass(frozen=True)
class ComputeConfig:
    vehicle_gips: float = 2.0
    edge_gips: float = 160.0
    cloud_gips: float = 1600.0
    edge_utilization_threshold_pct: float = 80.0
    max_coalition_helpers: int = 6


@dataclass(frozen=True)
class GameConfig:
    """Payoff structure and learning rate of the resource-sharing game.

    Rows and columns index the two actions (0 = give resources, 1 = get
    resources). action_payoff[m][n] is the reward for playing m against n;
    state_weight[m] weights the counterpart's (risky, safe) state estimate
    when valuing action m.
    """

    action_payoff: Matrix2 = ((0.25, 1.0), (1.0, 0.0))
    state_weight: Matrix2 = ((0.1, 1.0), (1.0, 0.5))
    learning_rate: float = 0.1
    initial_give_willingness: float = 0.5
    candidate_utility_min: float = 0.0


@dataclass(frozen=True)
class MobilityConfig:
    """Ring of locations grouped into types; one roadside AP + edge server each.

    location_counts[i] locations of type i are laid out in type order; a
    vehicle's dwell time at a location is exponential with that type's mean.
    """

    location_counts: tuple[int, ...] = (1, 1, 2)
    dwell_mean_s: tuple[float, ...] = (30.0, 20.0, 10.0)


# When a relocation kills a coalition task: "never" (coalition tasks ride out
# member movement like local ones), "owner" (only the task owner moving breaks
# it), "any-member" (any participant moving breaks it).
V2V_RELOCATION_MODES = ("never", "owner", "any-member")


@dataclass(frozen=True)
class ScenarioConfig:
    sim_duration_s: float = 1800.0
    warmup_s: float = 0.0
    n_vehicles: int = 100
    v2v_relocation_failure: str = "never"
    apps: dict[str, AppProfile] = field(default_factory=dict)
    net: NetworkConfig = field(default_factory=NetworkConfig)
    compute: ComputeConfig = field(default_factory=ComputeConfig)
    game: GameConfig = field(default_factory=GameConfig)
    mobility: MobilityConfig = field(default_factory=MobilityConfig)


def _default_apps() -> dict[str, AppProfile]:
    profiles = [
        AppProfile("Augmented Reality", 30.0, 1.0, 5.0, 40.0, 5.0, 1500.0, 25.0, 9.0, 6.0),
        AppProfile("Health App", 20.0, 1.0, 8.0, 45.0, 90.0, 1250.0, 20.0, 3.0, 2.0),
        AppProfile("Compute Intensive App", 20.0, 10.0, 8.0, 60.0, 120.0, 2500.0, 200.0, 45.0, 30.0),
        AppProfile("Infotainment App", 30.0, 5.0, 1.0, 30.0, 45.0, 2500.0, 200.0, 45.0, 30.0),
    ]
    return {p.name: p for p in profiles}


def default_scenario() -> ScenarioConfig:
    """The baseline urban scenario used by the benchmark sweep."""
    return ScenarioConfig(apps=_default_apps())


def _is_finite_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_matrix(m, label: str, out: list[str]) -> None:
    if (
        not isinstance(m, tuple)
        or len(m) != 2
        or any(not isinstance(row, tuple) or len(row) != 2 for row in m)
    ):
        out.append(f"{label} must be a 2x2 matrix")
        return
    if any(not _is_finite_number(x) for row in m for x in row):
        out.append(f"{label} entries must be finite numbers")


def validate(cfg: ScenarioConfig) -> list[str]:
    """Return all invariant violations; an empty list means the scenario is usable."""
    v: list[str] = []
    if not _is_finite_number(cfg.sim_duration_s) or cfg.sim_duration_s < 0:
        v.append("sim_duration_s must be >= 0")
    if not _is_finite_number(cfg.warmup_s) or cfg.warmup_s < 0:
        v.append("warmup_s must be >= 0")
    elif _is_finite_number(cfg.sim_duration_s) and cfg.warmup_s > cfg.sim_duration_s:
        v.append("warmup_s must not exceed sim_duration_s")
    if not isinstance(cfg.n_vehicles, int) or cfg.n_vehicles < 1:
        v.append("n_vehicles must be a positive integer")
    if cfg.v2v_relocation_failure not in V2V_RELOCATION_MODES:
        v.append(f"v2v_relocation_failure must be one of {V2V_RELOCATION_MODES}")

    if not cfg.apps:
        v.append("apps must not be empty")
    else:
        total_usage = 0.0
        for name, app in cfg.apps.items():
            if name != app.name:
                v.append(f"app key {name!r} does not match profile name {app.name!r}")
            pos = [
                ("usage_pct", app.usage_pct),
                ("interarrival_mean_s", app.interarrival_mean_s),
                ("delay_tolerance_s", app.delay_tolerance_s),
                ("active_period_s", app.active_period_s),
                ("task_length_mean_gi", app.task_length_mean_gi),
            ]
            for fname, val in pos:
                if not _is_finite_number(val) or val <= 0:
                    v.append(f"app {name!r}: {fname} must be > 0")
            nonneg = [
                ("idle_period_s", app.idle_period_s),
                ("upload_kb", app.upload_kb),
                ("download_kb", app.download_kb),
                ("vm_utilization_pct", app.vm_utilization_pct),
            ]
            for fname, val in nonneg:
                if not _is_finite_number(val) or val < 0:
                    v.append(f"app {name!r}: {fname} must be >= 0")
            if _is_finite_number(app.usage_pct):
                total_usage += app.usage_pct
        if abs(total_usage - 100.0) > 1e-6:
            v.append(f"app usage_pct values must sum to 100, got {total_usage:g}")

    for fname in ("v2v_rate_mbps", "v2i_rate_mbps", "wan_rate_mbps"):
        if not _is_finite_number(getattr(cfg.net, fname)) or getattr(cfg.net, fname) <= 0:
            v.append(f"net.{fname} must be > 0")
    if not isinstance(cfg.net.v2v_channel_sharing, bool):
        v.append("net.v2v_channel_sharing must be a boolean")

    for fname in ("vehicle_gips", "edge_gips", "cloud_gips"):
        if not _is_finite_number(getattr(cfg.compute, fname)) or getattr(cfg.compute, fname) <= 0:
            v.append(f"compute.{fname} must be > 0")
    thr = cfg.compute.edge_utilization_threshold_pct
    if not _is_finite_number(thr) or not 0 < thr <= 100:
        v.append("compute.edge_utilization_threshold_pct must be in (0, 100]")
    if not isinstance(cfg.compute.max_coalition_helpers, int) or cfg.compute.max_coalition_helpers < 0:
        v.append("compute.max_coalition_helpers must be a non-negative integer")

    _check_matrix(cfg.game.action_payoff, "game.action_payoff", v)
    _check_matrix(cfg.game.state_weight, "game.state_weight", v)
    if not _is_finite_number(cfg.game.learning_rate) or not 0 < cfg.game.learning_rate < 1:
        v.append("game.learning_rate must be in the open interval (0, 1)")
    if (
        not _is_finite_number(cfg.game.initial_give_willingness)
        or not 0 <= cfg.game.initial_give_willingness <= 1
    ):
        v.append("game.initial_give_willingness must be in [0, 1]")
    if not _is_finite_number(cfg.game.candidate_utility_min):
        v.append("game.candidate_utility_min must be finite")

    mob = cfg.mobility
    if len(mob.location_counts) != len(mob.dwell_mean_s):
        v.append("mobility.location_counts and mobility.dwell_mean_s must have equal length")
    if any(not isinstance(c, int) or c < 0 for c in mob.location_counts):
        v.append("mobility.location_counts entries must be non-negative integers")
    elif sum(mob.location_counts) < 1:
        v.append("mobility must define at least one location")
    if any(not _is_finite_number(d) or d <= 0 for d in mob.dwell_mean_s):
        v.append("mobility.dwell_mean_s entries must be > 0")

    return v


def _to_plain(cfg: ScenarioConfig) -> dict:
    d = asdict(cfg)
    # apps serialize as an ordered array of tables, not a keyed table
    d["apps"] = [asdict(app) for app in cfg.apps.values()]
    return _listify(d)


def _listify(obj):
    if isinstance(obj, tuple):
        return [_listify(x) for x in obj]
    if isinstance(obj, list):
        return [_listify(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _listify(v) for k, v in obj.items()}
    return obj


def dumps_scenario(cfg: ScenarioConfig) -> str:
    """Serialize a scenario to TOML. load round-trips to an identical config."""
    return toml.dumps(_to_plain(cfg))


def save_scenario(cfg: ScenarioConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_scenario(cfg))


def _matrix_from(obj, label: str) -> Matrix2:
    try:
        m = tuple(tuple(float(x) for x in row) for row in obj)
    except (TypeError, ValueError):
        raise ConfigError([f"{label} must be a 2x2 matrix of numbers"])
    return m  # shape checked by validate()


def _merge_section(default, data: dict, cls, label: str, matrices=()):
    known = {f for f in default.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ConfigError([f"unknown key {label}.{k}" for k in sorted(unknown)])
    kwargs = {}
    for key, val in data.items():
        if key in matrices:
            kwargs[key] = _matrix_from(val, f"{label}.{key}")
        elif isinstance(getattr(default, key), tuple):
            kwargs[key] = tuple(val)
        else:
            kwargs[key] = val
    merged = {f: getattr(default, f) for f in known}
    merged.update(kwargs)
    return cls(**merged)


def _app_from(table: dict, index: int) -> AppProfile:
    known = {f for f in AppProfile.__dataclass_fields__}
    unknown = set(table) - known
    if unknown:
        raise ConfigError([f"unknown key apps[{index}].{k}" for k in sorted(unknown)])
    missing = known - set(table)
    if missing:
        raise ConfigError([f"apps[{index}] missing key {k}" for k in sorted(missing)])
    return AppProfile(**table)


def loads_scenario(text: str) -> ScenarioConfig:
    """Parse TOML and merge it over the defaults. Raises ConfigError when invalid.

    Scalar keys and the net/compute/game/mobility tables merge key by key; an
    [[apps]] array, when present, replaces the default application set whole.
    """
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError([f"TOML parse error: {exc}"]) from exc

    base = default_scenario()
    top_scalars = {"sim_duration_s", "warmup_s", "n_vehicles", "v2v_relocation_failure"}
    sections = {"apps", "net", "compute", "game", "mobility"}
    unknown = set(data) - top_scalars - sections
    if unknown:
        raise ConfigError([f"unknown key {k}" for k in sorted(unknown)])

    kwargs = {k: data[k] for k in top_scalars & set(data)}
    if "apps" in data:
        apps = [_app_from(t, i) for i, t in enumerate(data["apps"])]
        kwargs["apps"] = {a.name: a for a in apps}
        if len(kwargs["apps"]) != len(apps):
            raise ConfigError(["duplicate app names in [[apps]]"])
    else:
        kwargs["apps"] = base.apps
    kwargs["net"] = _merge_section(base.net, data.get("net", {}), NetworkConfig, "net")
    kwargs["compute"] = _merge_section(base.compute, data.get("compute", {}), ComputeConfig, "compute")
    kwargs["game"] = _merge_section(
        base.game, data.get("game", {}), GameConfig, "game",
        matrices=("action_payoff", "state_weight"),
    )
    kwargs["mobility"] = _merge_section(base.mobility, data.get("mobility", {}), MobilityConfig, "mobility")

    cfg = ScenarioConfig(**kwargs)
    violations = validate(cfg)
    if violations:
        raise ConfigError(violations)
    return cfg


def load_scenario(path) -> ScenarioConfig:
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8")
    return loads_scenario(text)
