"""
AEDT - Aggregation Tree Procedure

Refresh cycles and transfer handling:

1. Every `refresh_interval` seconds the network is refreshed: a parent is
   elected, every budget is renewed and requests deferred with WAIT are
   handed back for resubmission (FIFO, ahead of new traffic).
2. A transmitter resolves its path (memory table first, greedy selection
   otherwise), asks the parent for admission and then either delivers,
   prioritizes or waits.
3. Delivery drains parent, transmitter and intermediates; plain nodes are
   awake only for the duration of the transfer.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple

from . import routing
from .capacity import AdmissionDecision, CapacityState, PacketTiming, admit, reset_capacity, rtcc, utilization
from .election import select_parent
from .energy import (
    DrainKind,
    DrainLog,
    DrainPolicy,
    apply_awake_drain,
    apply_transaction_drain,
    drain_node,
)
from .exceptions import AEDTError, NetworkDeadError, NoPathError
from .models import NodeId, NodeRole, NodeState, Packet, Path
from .topology import NetworkTopology, set_state

logger = logging.getLogger(__name__)


class OverloadMode(str, Enum):
    WAIT = "wait"
    PRIORITIZE = "prioritize"


@dataclass(frozen=True)
class OverloadPolicy:
    mode: OverloadMode = OverloadMode.WAIT
    # Prioritize: carry the excess into the next cycle instead of dropping it
    spill: bool = False


@dataclass(frozen=True)
class TransferRequest:
    transmitter: NodeId
    packets: Tuple[Packet, ...]
    submitted_at: float
    deferrals: int = 0

    def __post_init__(self):
        object.__setattr__(self, "packets", tuple(self.packets))
        if not self.packets:
            raise ValueError("A transfer request needs at least one packet")
        strays = [p.seq for p in self.packets if p.source != self.transmitter]
        if strays:
            raise ValueError(f"Packets {strays} do not originate at transmitter {self.transmitter}")


class TransferStatus(str, Enum):
    DELIVERED = "delivered"
    PARTIAL = "partial"
    DEFERRED = "deferred"
    UNDELIVERABLE = "undeliverable"


@dataclass(frozen=True)
class TransferOutcome:
    """
    Fate of every packet of a request. The four packet groups are disjoint
    and together equal the requested packets.
    """
    request: TransferRequest
    delivered: Tuple[Packet, ...] = ()
    deferred: Tuple[Packet, ...] = ()
    dropped: Tuple[Packet, ...] = ()
    undeliverable: Tuple[Packet, ...] = ()
    path_used: Optional[Path] = None
    delivered_at: Optional[float] = None
    decision: Optional[AdmissionDecision] = None
    reason: str = ""
    # Channel timing of the delivered packets; empty for zero-hop transfers
    timings: Tuple[PacketTiming, ...] = ()

    @property
    def airtime(self) -> float:
        return math.fsum(t.t_i for t in self.timings)

    @property
    def utilization(self) -> float:
        return utilization(self.timings)

    @property
    def hops(self) -> int:
        return self.path_used.hop_count if self.path_used is not None else 0

    @property
    def status(self) -> TransferStatus:
        if self.undeliverable:
            return TransferStatus.UNDELIVERABLE
        if self.delivered and not (self.deferred or self.dropped):
            return TransferStatus.DELIVERED
        if self.delivered:
            return TransferStatus.PARTIAL
        return TransferStatus.DEFERRED


@dataclass(frozen=True)
class CycleConfig:
    refresh_interval: float = 1.0
    hop_latency: float = 0.01
    overload_policy: OverloadPolicy = field(default_factory=OverloadPolicy)
    drain_policy: DrainPolicy = field(default_factory=DrainPolicy)
    path_cache: bool = True
    # False keeps every node awake (no duty cycling)
    sleep_enabled: bool = True
    # Static aggregator and precomputed routes (baseline); None for AEDT
    fixed_parent: Optional[NodeId] = None
    static_routes: Optional[Mapping[NodeId, Path]] = None
    # Channel capacity used to derive per-packet transmission times
    bandwidth_bps: float = 2e6

    def __post_init__(self):
        if self.bandwidth_bps <= 0:
            raise ValueError(f"bandwidth_bps must be positive, got {self.bandwidth_bps}")
        if self.refresh_interval <= 0:
            raise ValueError(f"refresh_interval must be positive, got {self.refresh_interval}")
        if self.hop_latency < 0:
            raise ValueError(f"hop_latency must be >= 0, got {self.hop_latency}")


@dataclass
class CycleState:
    index: int
    started_at: float
    parent: Optional[NodeId]
    budgets: Dict[NodeId, CapacityState]
    deferred: List[TransferRequest] = field(default_factory=list)
    resubmit: List[TransferRequest] = field(default_factory=list)
    delivered_packets: int = 0
    # Packets admitted this cycle per transmitter (K_x over the cycle)
    timings: Dict[NodeId, List[PacketTiming]] = field(default_factory=dict)

    @property
    def parent_budget(self) -> int:
        if self.parent is None or self.parent not in self.budgets:
            return 0
        return self.budgets[self.parent].remaining

    def utilization(self) -> float:
        return utilization(t for ts in self.timings.values() for t in ts)

    def rtcc(self) -> Optional[float]:
        """Real-time communication capacity of the cycle; None before any packet crossed the channel."""
        packets = [t for ts in self.timings.values() for t in ts]
        if not packets or self.parent is None or self.parent not in self.budgets:
            return None
        per_node = [utilization(ts) for _, ts in sorted(self.timings.items())]
        return rtcc(self.budgets[self.parent].bandwidth_b, per_node, packets)


def settle_awake_drain(network: NetworkTopology, policy: DrainPolicy, log: DrainLog, now: float) -> None:
    """Charge alpha for the time every awake non-parent node has been awake, restarting its clock."""
    for node in network:
        if not node.alive or node.state is not NodeState.AWAKE or node.is_parent:
            continue
        if node.awake_since is None:
            node.awake_since = now
            continue
        duration = now - node.awake_since
        apply_awake_drain(policy, node.id, duration, network, log, now)
        if node.alive:
            node.awake_since = now


def refresh_network(network: NetworkTopology, config: CycleConfig, previous: Optional[CycleState],
                    log: DrainLog, now: float) -> CycleState:
    """Start a new cycle: elect, renew budgets, hand back WAIT-deferred requests."""
    policy = config.drain_policy
    index = previous.index + 1 if previous is not None else 0

    if previous is not None and previous.parent is not None and policy.parent_cycle_drain > 0:
        drain_node(network, log, previous.parent, policy.parent_cycle_drain, DrainKind.PARENT_CYCLE, now)

    if not config.sleep_enabled:
        settle_awake_drain(network, policy, log, now)

    if not network.alive_ids():
        raise NetworkDeadError(f"Network dead at t={now}")

    if config.fixed_parent is not None:
        parent: Optional[NodeId] = config.fixed_parent
        aggregator = network.node(parent)
        if aggregator.alive:
            if aggregator.role is not NodeRole.PARENT:
                aggregator.role = NodeRole.PARENT
                set_state(network, parent, NodeState.AWAKE, now)
        else:
            parent = None
    else:
        parent = select_parent(network, round=index, now=now, policy=policy, log=log).parent

    if not config.sleep_enabled:
        for node_id in network.alive_ids():
            set_state(network, node_id, NodeState.AWAKE, now)

    budgets = {
        n.id: reset_capacity(
            CapacityState(nominal=n.comm_capacity, remaining=0, bandwidth_b=config.bandwidth_bps),
            config.refresh_interval,
        )
        for n in network if n.alive
    }
    resubmit = list(previous.deferred) if previous is not None else []

    logger.debug(f"Cycle {index} at t={now:.4f}s: parent {parent}, {len(resubmit)} deferred request(s)")
    return CycleState(index=index, started_at=now, parent=parent, budgets=budgets, resubmit=resubmit)


def _resolve_path(request: TransferRequest, parent: NodeId, network: NetworkTopology,
                  table: routing.MemoryTable, config: CycleConfig) -> Path:
    transmitter = request.transmitter
    if config.static_routes is not None:
        path = config.static_routes.get(transmitter)
        if path is None or any(not network.node(h).alive for h in path.hops):
            raise NoPathError(transmitter, parent)
        return path

    if config.path_cache:
        cached = routing.memory_lookup(table, parent, transmitter, network)
        if cached is not None:
            return cached
    path = routing.path_select(transmitter, parent, network)
    if config.path_cache:
        routing.memory_update(table, parent, transmitter, path, network)
    return path


def _delivery_time(request: TransferRequest, hops: int, config: CycleConfig) -> float:
    return request.submitted_at + request.deferrals * config.refresh_interval + hops * config.hop_latency


def _channel_timings(request: TransferRequest, packets: Tuple[Packet, ...], parent: NodeId,
                     network: NetworkTopology, state: CycleState) -> Tuple[PacketTiming, ...]:
    """T_i from packet size and bandwidth, D_i as the transmitter's distance to the parent."""
    if request.transmitter == parent:
        return ()
    bandwidth = state.budgets[parent].bandwidth_b
    distance = network.distance(request.transmitter, parent)
    timings = tuple(PacketTiming.from_size(p.size, bandwidth, distance) for p in packets)
    state.timings.setdefault(request.transmitter, []).extend(timings)
    return timings


def _deliver(request: TransferRequest, packets: Tuple[Packet, ...], path: Optional[Path], parent: NodeId,
             network: NetworkTopology, config: CycleConfig, log: DrainLog, now: float) -> float:
    """Run the transfer: wake the path, drain it, put plain nodes back to sleep."""
    hops = path.hop_count if path is not None else 0
    duration = hops * config.hop_latency
    end = now + duration
    relays = list(path.hops[:-1]) if path is not None else []

    if config.sleep_enabled:
        for node_id in relays:
            set_state(network, node_id, NodeState.AWAKE, now)

    apply_transaction_drain(
        config.drain_policy, parent, request.transmitter,
        path.intermediates if path is not None else (), network, log, end,
    )

    if config.sleep_enabled:
        for node_id in relays:
            node = network.node(node_id)
            if not node.alive:
                continue
            apply_awake_drain(config.drain_policy, node_id, duration, network, log, end)
            if node.alive:
                set_state(network, node_id, NodeState.SLEEP, end)

    return _delivery_time(request, hops, config)


def submit_transfer(request: TransferRequest, policy: OverloadPolicy, network: NetworkTopology,
                    table: routing.MemoryTable, state: CycleState, config: CycleConfig,
                    log: DrainLog, now: float) -> TransferOutcome:
    """
    Route and admit one transfer. Mutates the network energies, the memory
    table and the cycle state (budget, deferred queue).
    """
    packets = request.packets
    transmitter = network.node(request.transmitter)
    if not transmitter.alive:
        logger.debug(f"Transfer from dead node {request.transmitter} aborted")
        return TransferOutcome(request, undeliverable=packets, reason="transmitter_dead")

    parent = state.parent
    if parent is None or not network.node(parent).alive:
        return TransferOutcome(request, undeliverable=packets, reason="no_parent")

    path: Optional[Path] = None
    if request.transmitter != parent:
        try:
            path = _resolve_path(request, parent, network, table, config)
        except NoPathError as e:
            logger.warning(f"Undeliverable: {e}")
            return TransferOutcome(request, undeliverable=packets, reason="no_path")

    budget = state.budgets.get(parent)
    if budget is None:
        raise AEDTError(f"Parent {parent} has no budget in cycle {state.index}")
    decision, after = admit(budget, len(packets))

    if not decision.is_overload:
        state.budgets[parent] = after
        timings = _channel_timings(request, packets, parent, network, state)
        delivered_at = _deliver(request, packets, path, parent, network, config, log, now)
        state.delivered_packets += len(packets)
        return TransferOutcome(request, delivered=packets, path_used=path,
                               delivered_at=delivered_at, decision=decision, timings=timings)

    if policy.mode is OverloadMode.WAIT:
        # Nothing is sent, so the parent's budget is left untouched
        state.deferred.append(replace(request, deferrals=request.deferrals + 1))
        logger.debug(f"Overload: {len(packets)} packet(s) from {request.transmitter} wait for refresh")
        return TransferOutcome(request, deferred=packets, path_used=path, decision=decision, reason="overload_wait")

    ranked = sorted(packets, key=lambda p: (p.priority, p.seq))
    sent = tuple(ranked[:decision.accepted])
    excess = tuple(ranked[decision.accepted:])
    state.budgets[parent] = after

    deferred: Tuple[Packet, ...] = ()
    dropped: Tuple[Packet, ...] = excess
    if policy.spill and excess:
        state.deferred.append(TransferRequest(request.transmitter, excess, request.submitted_at,
                                              request.deferrals + 1))
        deferred, dropped = excess, ()

    delivered_at = None
    timings: Tuple[PacketTiming, ...] = ()
    if sent:
        timings = _channel_timings(request, sent, parent, network, state)
        delivered_at = _deliver(request, sent, path, parent, network, config, log, now)
        state.delivered_packets += len(sent)
    return TransferOutcome(request, delivered=sent, deferred=deferred, dropped=dropped, path_used=path,
                           delivered_at=delivered_at, decision=decision, reason="overload_prioritize",
                           timings=timings)


def transfer_delay(request: TransferRequest, outcome: TransferOutcome, hop_latency: float,
                   refresh_interval: float) -> Optional[float]:
    """
    End-to-end delay of the delivered packets: time of delivery minus the
    earliest creation time. Deferral adds one refresh interval per cycle
    waited. Returns None when nothing was delivered.
    """
    if not outcome.delivered:
        return None
    delivered_at = request.submitted_at + request.deferrals * refresh_interval + outcome.hops * hop_latency
    return delivered_at - min(p.created_at for p in request.packets)
