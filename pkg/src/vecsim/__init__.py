"""vecsim: deterministic discrete-event simulator for vehicular task
offloading across on-board, V2V-coalition, edge and cloud tiers."""

from .config import ScenarioConfig, default_scenario, load_scenario, validate
from .engine import RunHandle, run
from .metrics import MetricsReport, write_csv

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig",
    "default_scenario",
    "load_scenario",
    "validate",
    "RunHandle",
    "run",
    "MetricsReport",
    "write_csv",
    "__version__",
]
