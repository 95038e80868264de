"""
AEDT - Communication Capacity

Utilization factor, real-time communication capacity (RTCC) and the
parent's packet-budget admission gate.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

from .exceptions import FormulaDomainError

# Slack for float products such as 0.7 * 10 when flooring to whole packets
_BUDGET_EPS = 1e-9


@dataclass(frozen=True)
class PacketTiming:
    """
    Timing of one packet queued at a node.

    t_i: transmission time (s), d_i: distance of the node to the sink (m),
    p_i: packet size / effective bandwidth.
    """
    t_i: float
    d_i: float
    p_i: Optional[float] = None

    def __post_init__(self):
        if self.t_i <= 0:
            raise ValueError(f"PacketTiming.t_i must be positive, got {self.t_i}")
        if self.d_i < 0:
            raise ValueError(f"PacketTiming.d_i must be >= 0, got {self.d_i}")

    @classmethod
    def from_size(cls, size_bits: float, effective_bandwidth: float, distance: float) -> "PacketTiming":
        """Derive T_i from the packet size when a trace does not supply it."""
        if effective_bandwidth <= 0:
            raise FormulaDomainError(f"Effective bandwidth must be positive, got {effective_bandwidth}")
        ratio = size_bits / effective_bandwidth
        return cls(t_i=ratio, d_i=distance, p_i=ratio)


def utilization(packets: Iterable[PacketTiming]) -> float:
    """Sum of t_i / d_i over the packets."""
    terms = []
    for p in packets:
        if p.d_i == 0:
            raise FormulaDomainError("Utilization undefined for a packet at distance 0")
        terms.append(p.t_i / p.d_i)
    return math.fsum(terms)


def rtcc(b: float, numerator_utilizations: Sequence[float],
         denominator_packets: Sequence[PacketTiming]) -> float:
    """B * sum(U_tx) / sum(T_i / D_i)."""
    denominator = utilization(denominator_packets)
    if denominator == 0:
        raise FormulaDomainError("RTCC denominator is zero")
    return b * (math.fsum(numerator_utilizations) / denominator)


# ============================================================================
# Admission
# ============================================================================

class AdmissionKind(str, Enum):
    ACCEPT = "accept"
    OVERLOAD = "overload"


@dataclass(frozen=True)
class AdmissionDecision:
    kind: AdmissionKind
    offered: int
    accepted: int
    excess: int = 0

    @classmethod
    def accept(cls, count: int) -> "AdmissionDecision":
        return cls(AdmissionKind.ACCEPT, offered=count, accepted=count)

    @classmethod
    def overload(cls, accepted: int, excess: int) -> "AdmissionDecision":
        return cls(AdmissionKind.OVERLOAD, offered=accepted + excess, accepted=accepted, excess=excess)

    @property
    def is_overload(self) -> bool:
        return self.kind is AdmissionKind.OVERLOAD


@dataclass(frozen=True)
class CapacityState:
    """Per-cycle packet budget of a node."""
    nominal: float  # packets/second
    remaining: int  # packets left in this cycle
    bandwidth_b: float = 2e6  # bits/second


def cycle_budget(nominal: float, refresh_interval: float) -> int:
    return int(math.floor(nominal * refresh_interval + _BUDGET_EPS))


def admit(state: CapacityState, offered: int) -> Tuple[AdmissionDecision, CapacityState]:
    """Accept when offered <= remaining, otherwise report OVERLOAD with what still fits."""
    if offered < 0:
        raise ValueError(f"Offered packet count must be >= 0, got {offered}")
    if offered <= state.remaining:
        return AdmissionDecision.accept(offered), replace(state, remaining=state.remaining - offered)
    decision = AdmissionDecision.overload(accepted=state.remaining, excess=offered - state.remaining)
    return decision, replace(state, remaining=0)


def reset_capacity(state: CapacityState, refresh_interval: float) -> CapacityState:
    if refresh_interval <= 0:
        raise ValueError(f"Refresh interval must be positive, got {refresh_interval}")
    return replace(state, remaining=cycle_budget(state.nominal, refresh_interval))
