"""
AEDT - Discrete-Event Simulator

Single logical clock driven by a heap of (time, event type, event id)
entries. Refreshes fire at k * refresh_interval, transfers follow the
pre-generated CBR schedule, and the run ends at `duration` or when no node
is left alive.

Protocols:
    aedt          energy-based election, duty cycling, greedy routing + memory table
    aedt-nosleep  same, but every node stays awake (ablation)
    static-tree   fixed aggregator nearest the area centre, hop-count BFS
                  routes computed once at t=0, every node awake
"""

import heapq
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from .aggregation import (
    CycleConfig,
    CycleState,
    OverloadPolicy,
    TransferOutcome,
    TransferRequest,
    refresh_network,
    settle_awake_drain,
    submit_transfer,
    transfer_delay,
)
from .energy import DrainLog
from .exceptions import NetworkDeadError
from .metrics import MetricsRecord, collect_metrics
from .models import NodeId, Path
from .routing import MemoryTable
from .scenario import Protocol, ScenarioConfig
from .topology import NetworkTopology, build_topology
from .trace import EventKind, EventTrace
from .traffic import generate_placement, generate_traffic

logger = logging.getLogger(__name__)


class EventType(IntEnum):
    # Lower value runs first at equal timestamps
    REFRESH = 0
    TRANSFER = 1
    END = 2


@dataclass(order=True)
class Event:
    time: float
    type: EventType
    eid: int
    request: Optional[TransferRequest] = field(default=None, compare=False)


@dataclass(frozen=True)
class SimulationSettings:
    protocol: Protocol
    cycle: CycleConfig
    duration: float
    seed: int = 0
    # Deployment area, used to place the static aggregator
    area: Optional[Tuple[float, float]] = None

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "SimulationSettings":
        return cls(
            protocol=config.protocol,
            cycle=config.cycle_config(),
            duration=config.duration,
            seed=config.seed,
            area=(config.area_width, config.area_height),
        )


Observer = Callable[[float, NetworkTopology, Optional[CycleState]], None]


def static_aggregator(network: NetworkTopology, area: Optional[Tuple[float, float]] = None) -> NodeId:
    """Node nearest the centre of the area (ties to the smaller id)."""
    if area is not None:
        centre = (area[0] / 2.0, area[1] / 2.0)
    else:
        xs = [n.position[0] for n in network]
        ys = [n.position[1] for n in network]
        centre = ((min(xs) + max(xs)) / 2.0, (min(ys) + max(ys)) / 2.0)
    return min(network.node_ids(), key=lambda n: (math.dist(network.node(n).position, centre), n))


def static_routes(network: NetworkTopology, aggregator: NodeId) -> Dict[NodeId, Path]:
    """Hop-count shortest paths from every reachable node to the aggregator."""
    preds = dict(nx.bfs_predecessors(network.graph, aggregator, sort_neighbors=sorted))
    routes: Dict[NodeId, Path] = {}
    for node_id in preds:
        hops = [node_id]
        while hops[-1] != aggregator:
            hops.append(preds[hops[-1]])
        routes[node_id] = Path(tuple(hops))
    return routes


def audit_energy(before: NetworkTopology, after: NetworkTopology, log: DrainLog) -> float:
    """Residual of the conservation audit: (initial - final) - drained."""
    consumed = math.fsum(before.node(n).e_avail - after.node(n).e_avail for n in before.node_ids())
    return consumed - log.total()


class Simulation:
    """One run over a fixed topology and transfer schedule."""

    def __init__(self, topology: NetworkTopology, schedule: Sequence[TransferRequest],
                 settings: SimulationSettings, observer: Optional[Observer] = None):
        self.settings = settings
        self.initial = topology.copy()
        self.network = topology.copy()
        self.schedule = list(schedule)
        self.observer = observer

        self.table = MemoryTable()
        self.log = DrainLog()
        self.trace = EventTrace()
        self.outcomes: List[TransferOutcome] = []
        self.state: Optional[CycleState] = None

        self._queue: List[Event] = []
        self._eid = 0
        self._tick = 0
        self._dead: Set[NodeId] = set()
        # Packets submitted without a final fate yet (deferred or in flight)
        self._open = 0
        self._finished = False

        self.cycle = settings.cycle
        self.aggregator: Optional[NodeId] = None
        if settings.protocol is Protocol.STATIC_TREE:
            self.aggregator = static_aggregator(self.network, settings.area)
            routes = static_routes(self.network, self.aggregator)
            self.cycle = CycleConfig(
                refresh_interval=settings.cycle.refresh_interval,
                hop_latency=settings.cycle.hop_latency,
                overload_policy=settings.cycle.overload_policy,
                drain_policy=settings.cycle.drain_policy,
                bandwidth_bps=settings.cycle.bandwidth_bps,
                path_cache=False,
                sleep_enabled=False,
                fixed_parent=self.aggregator,
                static_routes=routes,
            )
            reachable = len(routes) + 1
            if reachable < len(self.network):
                logger.warning(
                    f"Static tree: topology disconnected, aggregator {self.aggregator} "
                    f"reaches {reachable}/{len(self.network)} nodes"
                )
        elif settings.protocol is Protocol.AEDT_NOSLEEP and settings.cycle.sleep_enabled:
            self.cycle = CycleConfig(
                refresh_interval=settings.cycle.refresh_interval,
                hop_latency=settings.cycle.hop_latency,
                overload_policy=settings.cycle.overload_policy,
                drain_policy=settings.cycle.drain_policy,
                bandwidth_bps=settings.cycle.bandwidth_bps,
                path_cache=settings.cycle.path_cache,
                sleep_enabled=False,
            )

    # ------------------------------------------------------------------
    # Queue helpers
    # ------------------------------------------------------------------

    def _push(self, time: float, event_type: EventType, request: Optional[TransferRequest] = None) -> None:
        heapq.heappush(self._queue, Event(time, event_type, self._eid, request))
        self._eid += 1

    @property
    def overload_policy(self) -> OverloadPolicy:
        return self.cycle.overload_policy

    # ------------------------------------------------------------------
    # Run
    # ------------------------------------------------------------------

    def run(self) -> Tuple[MetricsRecord, EventTrace]:
        settings = self.settings
        extra = {}
        if self.aggregator is not None:
            extra["aggregator"] = self.aggregator
        self.trace.record(
            0.0, EventKind.START, None,
            protocol=settings.protocol.value, seed=settings.seed, nodes=len(self.network),
            bandwidth=float(self.cycle.bandwidth_bps),
            duration=float(settings.duration), refresh=float(self.cycle.refresh_interval), **extra,
        )
        for node in self.network:
            self.trace.record(0.0, EventKind.NODE_INIT, None, node=node.id, energy=node.e_avail,
                              x=node.position[0], y=node.position[1])

        self._push(0.0, EventType.REFRESH)
        for request in self.schedule:
            if request.submitted_at < settings.duration:
                self._push(request.submitted_at, EventType.TRANSFER, request)
        self._push(float(settings.duration), EventType.END)

        while self._queue and not self._finished:
            event = heapq.heappop(self._queue)
            now = event.time
            if event.type is EventType.REFRESH:
                self._on_refresh(now)
            elif event.type is EventType.TRANSFER:
                self._on_transfer(event.request, now)
            else:
                self._finish(now, "duration")
                break

            self._record_deaths(now)
            if not self._finished and not self.network.alive_ids():
                self._finish(now, "network_dead")
            if self.observer is not None and not self._finished:
                self.observer(now, self.network, self.state)

        residual = audit_energy(self.initial, self.network, self.log)
        logger.debug(f"Energy audit residual {residual:.3e}J over {len(self.log)} drain entries")
        return collect_metrics(self.trace), self.trace

    # ------------------------------------------------------------------
    # Event handlers
    # ------------------------------------------------------------------

    def _refresh(self, now: float, reason: str) -> bool:
        capacity = self.state.rtcc() if self.state is not None else None
        if capacity is not None:
            logger.debug(
                f"Cycle {self.state.index} closed: utilization {self.state.utilization():.6g}, "
                f"RTCC {capacity:.6g} bit/s"
            )
        try:
            self.state = refresh_network(self.network, self.cycle, self.state, self.log, now)
        except NetworkDeadError:
            self._record_deaths(now)
            self._finish(now, "network_dead")
            return False
        self._record_deaths(now)
        self.trace.record(
            now, EventKind.REFRESH, self.state.parent,
            cycle=self.state.index, reason=reason, alive=len(self.network.alive_ids()),
            energy=self.network.total_energy(), budget=self.state.parent_budget,
        )
        resubmit, self.state.resubmit = self.state.resubmit, []
        for request in resubmit:
            self.trace.record(now, EventKind.RESUBMIT, self._actor(request.transmitter),
                              source=request.transmitter, count=len(request.packets), deferrals=request.deferrals)
            self._submit(request, now)
        return True

    def _on_refresh(self, now: float) -> None:
        if not self._refresh(now, "scheduled"):
            return
        self._tick += 1
        next_time = self._tick * self.cycle.refresh_interval
        if next_time < self.settings.duration:
            self._push(next_time, EventType.REFRESH)

    def _on_transfer(self, request: TransferRequest, now: float) -> None:
        count = len(request.packets)
        if not self.cycle.sleep_enabled:
            # Always-awake nodes pay alpha continuously
            settle_awake_drain(self.network, self.cycle.drain_policy, self.log, now)
            self._record_deaths(now)
        if not self.network.node(request.transmitter).alive:
            self.trace.record(now, EventKind.SOURCE_DEAD, None, source=request.transmitter, count=count)
            return
        self.trace.record(now, EventKind.SUBMIT, request.transmitter, count=count)
        self._open += count
        self._submit(request, now)

    def _submit(self, request: TransferRequest, now: float) -> None:
        if self.state is None or self._finished:
            return
        if self.aggregator is None:
            parent = self.state.parent
            if parent is None or not self.network.node(parent).alive:
                if not self._refresh(now, "parent_lost"):
                    return

        actor = self._actor(request.transmitter)
        outcome = submit_transfer(request, self.overload_policy, self.network, self.table,
                                  self.state, self.cycle, self.log, now)
        self.outcomes.append(outcome)
        self._open -= len(outcome.delivered) + len(outcome.dropped) + len(outcome.undeliverable)

        if outcome.delivered:
            delay = transfer_delay(request, outcome, self.cycle.hop_latency, self.cycle.refresh_interval)
            path = str(outcome.path_used) if outcome.path_used is not None else str(request.transmitter)
            self.trace.record(now, EventKind.DELIVER, actor, count=len(outcome.delivered),
                              delay=delay, hops=outcome.hops, path=path,
                              airtime=outcome.airtime, utilization=outcome.utilization)
        if outcome.deferred:
            self.trace.record(now, EventKind.DEFER, actor, count=len(outcome.deferred), reason=outcome.reason)
        if outcome.dropped:
            self.trace.record(now, EventKind.DROP, actor, count=len(outcome.dropped), reason=outcome.reason)
        if outcome.undeliverable:
            self.trace.record(now, EventKind.UNDELIVERABLE, actor, count=len(outcome.undeliverable),
                              reason=outcome.reason)

    def _actor(self, node_id: NodeId) -> Optional[NodeId]:
        return node_id if self.network.node(node_id).alive else None

    def _record_deaths(self, now: float) -> None:
        for node in self.network:
            if not node.alive and node.id not in self._dead:
                self._dead.add(node.id)
                died_at = node.died_at if node.died_at is not None else now
                self.trace.record(now, EventKind.NODE_DIED, None, node=node.id, died_at=float(died_at))

    def _finish(self, now: float, reason: str) -> None:
        if self._finished:
            return
        if not self.cycle.sleep_enabled and self.network.alive_ids():
            settle_awake_drain(self.network, self.cycle.drain_policy, self.log, now)
            self._record_deaths(now)

        pending = self._open
        self._finished = True
        self.trace.record(now, EventKind.END, None, reason=reason,
                          duration=float(self.settings.duration), pending=pending)
        for node in self.network:
            self.trace.record(now, EventKind.CENSUS, None, node=node.id, energy=node.e_avail)
        logger.info(f"Run finished at t={now:.4f}s ({reason}): {len(self._dead)} dead node(s)")


# ============================================================================
# Entry points
# ============================================================================

def simulate(topology: NetworkTopology, schedule: Sequence[TransferRequest],
             settings: SimulationSettings, observer: Optional[Observer] = None) -> Tuple[MetricsRecord, EventTrace]:
    return Simulation(topology, schedule, settings, observer).run()


def prepare(config: ScenarioConfig) -> Tuple[NetworkTopology, List[TransferRequest]]:
    """Seeded placement and traffic; independent of the protocol."""
    placement_seq, traffic_seq = np.random.SeedSequence(config.seed).spawn(2)
    specs = generate_placement(config, np.random.default_rng(placement_seq))
    topology = build_topology(specs, config.radio_range)
    schedule = generate_traffic(config, np.random.default_rng(traffic_seq), topology.node_ids())
    return topology, schedule


def run(config: ScenarioConfig) -> Tuple[MetricsRecord, EventTrace]:
    topology, schedule = prepare(config)
    logger.info(
        f"Running {config.protocol.value}: {config.node_count} nodes, "
        f"{len(schedule)} transfers, seed {config.seed}"
    )
    return simulate(topology, schedule, SimulationSettings.from_config(config))


def run_static_tree_baseline(config: ScenarioConfig) -> MetricsRecord:
    record, _ = run(config.with_overrides(protocol=Protocol.STATIC_TREE))
    return record


def derive_seed(base_seed: int, node_count: int) -> int:
    state = np.random.SeedSequence([base_seed, node_count]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _run_metrics(config: ScenarioConfig) -> MetricsRecord:
    return run(config)[0]


def sweep(base_config: ScenarioConfig, node_counts: Sequence[int], jobs: int = 1) -> List[MetricsRecord]:
    """One run per node count (ordered by node count), each with a derived seed."""
    if not node_counts:
        raise ValueError("sweep needs at least one node count")
    configs = [
        base_config.with_overrides(node_count=n, seed=derive_seed(base_config.seed, n))
        for n in sorted(node_counts)
    ]
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_metrics, configs))
    return [_run_metrics(c) for c in configs]
