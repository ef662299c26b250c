"""End-to-end delay models for the four execution tiers.

Conventions: 1 KB = 8000 bits, 1 Mbps = 1e6 bits/s, compute rates in GIPS
(giga-instructions per second), task lengths in GI. Delays are seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

BITS_PER_KB = 8000.0
BITS_PER_MBPS = 1.0e6


class DegeneratePoolError(ValueError):
    """A coalition delay was requested for a pool with no compute capacity."""


@dataclass(frozen=True)
class DelayEstimate:
    total_s: float
    compute_s: float
    comm_s: float


def transfer_s(kilobytes: float, rate_mbps: float) -> float:
    """Serial transfer time of a payload over one link."""
    return kilobytes * BITS_PER_KB / (rate_mbps * BITS_PER_MBPS)


def local_delay(length_gi: float, spare_gips: float) -> DelayEstimate:
    """On-board execution at the host's current spare rate; no transfer.

    A host with no spare capacity cannot start the task, modeled as an
    infinite delay so every finite deadline rejects it.
    """
    if spare_gips <= 0.0:
        return DelayEstimate(math.inf, math.inf, 0.0)
    compute = length_gi / spare_gips
    return DelayEstimate(compute, compute, 0.0)


def v2v_delay(
    length_gi: float,
    pooled_gips: float,
    upload_kb: float,
    download_kb: float,
    v2v_rate_mbps: float,
) -> DelayEstimate:
    """Coalition execution: broadcast input, compute in parallel at the pooled
    rate, then collect output. Input and output move serially over V2V links."""
    if pooled_gips <= 0.0:
        raise DegeneratePoolError(f"pooled rate must be > 0, got {pooled_gips}")
    compute = length_gi / pooled_gips
    comm = transfer_s(upload_kb, v2v_rate_mbps) + transfer_s(download_kb, v2v_rate_mbps)
    return DelayEstimate(compute + comm, compute, comm)


def edge_delay(
    length_gi: float,
    edge_gips: float,
    upload_kb: float,
    download_kb: float,
    v2i_rate_mbps: float,
) -> DelayEstimate:
    """Execution on the roadside edge server over one vehicle-to-AP hop."""
    compute = length_gi / edge_gips
    comm = transfer_s(upload_kb, v2i_rate_mbps) + transfer_s(download_kb, v2i_rate_mbps)
    return DelayEstimate(compute + comm, compute, comm)


def cloud_delay(
    length_gi: float,
    cloud_gips: float,
    upload_kb: float,
    download_kb: float,
    v2i_rate_mbps: float,
    wan_rate_mbps: float,
) -> DelayEstimate:
    """Execution in the remote cloud: vehicle-to-AP hop plus WAN hop, serial."""
    compute = length_gi / cloud_gips
    comm = transfer_s(upload_kb + download_kb, v2i_rate_mbps)
    comm += transfer_s(upload_kb + download_kb, wan_rate_mbps)
    return DelayEstimate(compute + comm, compute, comm)
