"""
AEDT - Energy Model

Trace-based energy estimators, the path-loss power law, the linear
network-size estimate and the drain rules applied by the simulator.

All drains go through `drain_node`, which clamps at zero and appends an
entry to a DrainLog so that the run can be audited afterwards.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .exceptions import DeadNodeError, FormulaDomainError, TraceCoverageError
from .models import NodeId, NodeRole, NodeState
from .topology import NetworkTopology

logger = logging.getLogger(__name__)

Sample = Tuple[float, float]


# ============================================================================
# Sampled traces
# ============================================================================

def _check_samples(samples: Sequence[Sample], name: str, allow_negative: bool = False) -> Tuple[Sample, ...]:
    samples = tuple((float(t), float(v)) for t, v in samples)
    if not samples:
        raise ValueError(f"{name}: at least one sample required")
    times = [t for t, _ in samples]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError(f"{name}: sample times must be strictly increasing")
    if not allow_negative and any(v < 0 for _, v in samples):
        raise ValueError(f"{name}: sample values must be >= 0")
    return samples


@dataclass(frozen=True)
class _Trace:
    samples: Tuple[Sample, ...]

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples], dtype=float)

    def covers(self, start: float, end: float) -> bool:
        return self.samples[0][0] <= start and end <= self.samples[-1][0]

    def at(self, t: float) -> float:
        if not self.covers(t, t):
            raise TraceCoverageError(f"{type(self).__name__} does not cover t={t}")
        return float(np.interp(t, self.times, self.values))

    def integrate(self, start: float, end: float) -> float:
        """Trapezoidal integral over [start, end] (exact on piecewise-linear traces)."""
        if not self.covers(start, end):
            first, last = self.samples[0][0], self.samples[-1][0]
            raise TraceCoverageError(
                f"{type(self).__name__} covers [{first}, {last}], requested [{start}, {end}]"
            )
        times = self.times
        inner = times[(times > start) & (times < end)]
        grid = np.concatenate(([start], inner, [end]))
        vals = np.interp(grid, times, self.values)
        return math.fsum(np.diff(grid) * (vals[1:] + vals[:-1]) / 2.0)


@dataclass(frozen=True)
class BatteryTrace(_Trace):
    """Battery level E_b(t) in joules."""

    def __post_init__(self):
        object.__setattr__(self, "samples", _check_samples(self.samples, "BatteryTrace"))


@dataclass(frozen=True)
class PowerTrace(_Trace):
    """Instantaneous power consumption P_c(t) in watts."""

    def __post_init__(self):
        object.__setattr__(self, "samples", _check_samples(self.samples, "PowerTrace"))


@dataclass(frozen=True)
class VoltageProbe:
    """Voltage V_r(t) across a test resistance r, fed by v_in."""
    v_in: float
    r: float
    v_r: Tuple[Sample, ...]

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError(f"VoltageProbe: r must be positive, got {self.r}")
        if self.v_in <= 0:
            raise ValueError(f"VoltageProbe: v_in must be positive, got {self.v_in}")
        object.__setattr__(self, "v_r", _check_samples(self.v_r, "VoltageProbe", allow_negative=True))

    @property
    def trace(self) -> _Trace:
        return _Trace(self.v_r)


def available_energy(battery: BatteryTrace, power: PowerTrace, t1: float, t2: float) -> float:
    """E_avail = E_b(t2) - E_b(t1) + integral of P_c over [t1, t2]."""
    if not t1 < t2:
        raise FormulaDomainError(f"available_energy needs t1 < t2, got t1={t1}, t2={t2}")
    if not battery.covers(t1, t2):
        raise TraceCoverageError(f"Battery trace does not cover [{t1}, {t2}]")
    consumed = power.integrate(t1, t2)
    return battery.at(t2) - battery.at(t1) + consumed


def power_consumption(p_t: float, d: float, alpha_exp: float = 2.0, k: float = 1.0) -> float:
    """Path-loss power law: k * p_t / d**alpha_exp, alpha_exp in [2, 4]."""
    if d <= 0:
        raise FormulaDomainError(f"Distance must be positive, got {d}")
    if not 2.0 <= alpha_exp <= 4.0:
        raise FormulaDomainError(f"Path-loss exponent must lie in [2, 4], got {alpha_exp}")
    if k <= 0:
        raise FormulaDomainError(f"Proportionality constant must be positive, got {k}")
    return k * p_t / d ** alpha_exp


def node_energy_consumed(probe: VoltageProbe, t0: float, t1: float) -> float:
    """E_con = (v_in / r) * integral of V_r over [t0, t1]."""
    if not t0 < t1:
        raise FormulaDomainError(f"node_energy_consumed needs t0 < t1, got t0={t0}, t1={t1}")
    return probe.v_in / probe.r * probe.trace.integrate(t0, t1)


@dataclass(frozen=True)
class NetworkEnergyModel:
    """Linear estimate of network energy from its size: m * size + b."""
    m: float
    b: float

    @classmethod
    def fit(cls, points: Iterable[Tuple[float, float]]) -> "NetworkEnergyModel":
        """Least-squares fit of (size, energy) observations."""
        pts = list(points)
        if len({s for s, _ in pts}) < 2:
            raise FormulaDomainError("Fitting needs at least two distinct network sizes")
        sizes = np.array([s for s, _ in pts], dtype=float)
        energies = np.array([e for _, e in pts], dtype=float)
        m, b = np.polyfit(sizes, energies, 1)
        return cls(m=float(m), b=float(b))


def network_energy_estimate(model: NetworkEnergyModel, size: int) -> float:
    if size < 0:
        raise FormulaDomainError(f"Network size must be >= 0, got {size}")
    return model.m * size + model.b


# ============================================================================
# Drain rules
# ============================================================================

class DrainKind(str, Enum):
    TRANSACTION = "transaction"
    AWAKE = "awake"
    PARENT_CYCLE = "parent_cycle"
    BROADCAST = "broadcast"


@dataclass(frozen=True)
class DrainPolicy:
    """
    Composable drain rules. Setting a coefficient to 0 disables that rule.

    unit_drain:         joules per transaction for parent, transmitter and each intermediate
    alpha:              joules per awake second for non-parent nodes
    parent_cycle_drain: joules the outgoing parent loses at each refresh
    broadcast_drain:    joules every alive node loses per energy broadcast
    """
    unit_drain: float = 1.0
    alpha: float = 0.01
    parent_cycle_drain: float = 0.0
    broadcast_drain: float = 0.0

    def __post_init__(self):
        for name in ("unit_drain", "alpha", "parent_cycle_drain", "broadcast_drain"):
            if getattr(self, name) < 0:
                raise ValueError(f"DrainPolicy.{name} must be >= 0")


@dataclass(frozen=True)
class DrainEntry:
    time: float
    node: NodeId
    kind: DrainKind
    requested: float
    applied: float
    clamped: bool


@dataclass
class DrainLog:
    """Append-only record of every joule removed from a node."""
    entries: List[DrainEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, entry: DrainEntry) -> None:
        self.entries.append(entry)

    def total(self) -> float:
        return math.fsum(e.applied for e in self.entries)

    def by_node(self) -> Dict[NodeId, float]:
        per_node: Dict[NodeId, List[float]] = {}
        for e in self.entries:
            per_node.setdefault(e.node, []).append(e.applied)
        return {n: math.fsum(v) for n, v in sorted(per_node.items())}

    def clamp_events(self) -> List[DrainEntry]:
        return [e for e in self.entries if e.clamped]

    def to_frame(self) -> pd.DataFrame:
        columns = ["time", "node", "kind", "requested", "applied", "clamped"]
        return pd.DataFrame(
            [(e.time, e.node, e.kind.value, e.requested, e.applied, e.clamped) for e in self.entries],
            columns=columns,
        )


def drain_node(network: NetworkTopology, log: DrainLog, node_id: NodeId, amount: float,
               kind: DrainKind, now: float = 0.0, exhausted_at: Optional[float] = None) -> Optional[DrainEntry]:
    """
    Remove `amount` joules from a node, clamped at zero. A node reaching zero
    dies at `exhausted_at` (defaults to `now`).
    """
    node = network.node(node_id)
    if amount <= 0 or not node.alive:
        return None

    before = node.e_avail
    clamped = amount >= before
    node.e_avail = 0.0 if clamped else before - amount
    entry = DrainEntry(
        time=now, node=node_id, kind=kind, requested=amount,
        applied=before - node.e_avail, clamped=clamped,
    )
    log.append(entry)

    if clamped:
        if amount > before:
            logger.warning(f"Clamped {kind.value} drain on node {node_id}: requested {amount:.4f}J, had {before:.4f}J")
        node.died_at = now if exhausted_at is None else exhausted_at
        node.state = NodeState.SLEEP
        node.role = NodeRole.PLAIN
        node.awake_since = None
        logger.info(f"Node {node_id} ran out of energy at t={node.died_at:.4f}s")
    return entry


def apply_transaction_drain(policy: DrainPolicy, parent: NodeId, transmitter: NodeId,
                            intermediates: Sequence[NodeId], network: NetworkTopology,
                            log: DrainLog, now: float = 0.0) -> List[DrainEntry]:
    """Parent, transmitter and every intermediate lose unit_drain joules each."""
    involved: List[NodeId] = []
    for node_id in [parent, transmitter, *intermediates]:
        if node_id not in involved:
            involved.append(node_id)
    for node_id in involved:
        if not network.node(node_id).alive:
            raise DeadNodeError(node_id, "take part in a transaction")

    applied = []
    for node_id in involved:
        entry = drain_node(network, log, node_id, policy.unit_drain, DrainKind.TRANSACTION, now)
        if entry is not None:
            applied.append(entry)
    return applied


def apply_awake_drain(policy: DrainPolicy, node: NodeId, awake_duration: float,
                      network: NetworkTopology, log: DrainLog, now: float = 0.0) -> List[DrainEntry]:
    """
    Non-parent awake node loses alpha * awake_duration joules, settled at
    `now` for the window [now - awake_duration, now]. A node exhausted inside
    the window dies when its energy actually ran out, not at `now`.
    """
    if awake_duration < 0:
        raise FormulaDomainError(f"Awake duration must be >= 0, got {awake_duration}")
    amount = policy.alpha * awake_duration
    exhausted_at = None
    target = network.node(node)
    if target.alive and amount >= target.e_avail:
        exhausted_at = min(now, now - awake_duration + target.e_avail / policy.alpha)
    entry = drain_node(network, log, node, amount, DrainKind.AWAKE, now, exhausted_at)
    return [entry] if entry is not None else []
