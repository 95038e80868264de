"""
AEDT - Energy-Aware Data Aggregation Tree Simulator

Discrete-event simulation of a wireless sensor network that elects the
most energy-rich node as the aggregation parent every refresh cycle,
routes data to it greedily over energy-rich neighbours and keeps every
other node asleep between transfers.
"""

from .aggregation import (
    CycleConfig,
    CycleState,
    OverloadMode,
    OverloadPolicy,
    TransferOutcome,
    TransferRequest,
    refresh_network,
    submit_transfer,
    transfer_delay,
)
from .capacity import AdmissionDecision, CapacityState, PacketTiming, admit, reset_capacity, rtcc, utilization
from .election import ElectionResult, broadcast_energy, select_parent
from .energy import (
    DrainLog,
    DrainPolicy,
    NetworkEnergyModel,
    apply_awake_drain,
    apply_transaction_drain,
    available_energy,
    network_energy_estimate,
    node_energy_consumed,
    power_consumption,
)
from .exceptions import AEDTError, ConfigError
from .metrics import MetricsRecord, collect_metrics
from .models import NodeRole, NodeState, Packet, Path, SensorNode
from .routing import MemoryTable, memory_lookup, memory_update, path_select
from .scenario import Protocol, ScenarioConfig, load_scenario, parse_scenario
from .simulator import derive_seed, run, run_static_tree_baseline, simulate, sweep
from .topology import NetworkTopology, build_topology, set_state
from .trace import EventKind, EventTrace

__all__ = [
    'AEDTError', 'ConfigError',
    'NodeState', 'NodeRole', 'SensorNode', 'Packet', 'Path',
    'NetworkTopology', 'build_topology', 'set_state',
    'available_energy', 'power_consumption', 'node_energy_consumed',
    'NetworkEnergyModel', 'network_energy_estimate',
    'DrainPolicy', 'DrainLog', 'apply_transaction_drain', 'apply_awake_drain',
    'PacketTiming', 'utilization', 'rtcc', 'CapacityState', 'AdmissionDecision', 'admit', 'reset_capacity',
    'ElectionResult', 'broadcast_energy', 'select_parent',
    'path_select', 'MemoryTable', 'memory_lookup', 'memory_update',
    'OverloadMode', 'OverloadPolicy', 'TransferRequest', 'TransferOutcome',
    'CycleConfig', 'CycleState', 'refresh_network', 'submit_transfer', 'transfer_delay',
    'EventKind', 'EventTrace', 'MetricsRecord', 'collect_metrics',
    'Protocol', 'ScenarioConfig', 'parse_scenario', 'load_scenario',
    'simulate', 'run', 'run_static_tree_baseline', 'sweep', 'derive_seed',
]
