"""
AEDT - Data Models

Core domain types shared by every module: sensor nodes, packets and paths.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from .exceptions import InvalidPathError

NodeId = int
Position = Tuple[float, float]


class NodeState(str, Enum):
    SLEEP = "sleep"
    AWAKE = "awake"


class NodeRole(str, Enum):
    PLAIN = "plain"
    PARENT = "parent"


@dataclass
class SensorNode:
    """A battery powered sensor node."""
    id: NodeId
    position: Position
    e_avail: float  # joules
    comm_capacity: float  # packets/second
    state: NodeState = NodeState.SLEEP
    role: NodeRole = NodeRole.PLAIN

    # Awake-duration clock for the alpha drain; None while asleep
    awake_since: Optional[float] = None
    died_at: Optional[float] = None

    @property
    def alive(self) -> bool:
        return self.e_avail > 0

    @property
    def is_parent(self) -> bool:
        return self.role is NodeRole.PARENT


@dataclass(frozen=True)
class Packet:
    """A sensed data packet. Lower priority value = more important."""
    seq: int
    source: NodeId
    created_at: float
    size: int  # bits
    priority: int = 0

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError(f"Packet {self.seq}: size must be positive, got {self.size}")
        if self.created_at < 0:
            raise ValueError(f"Packet {self.seq}: created_at must be >= 0, got {self.created_at}")


@dataclass(frozen=True)
class Path:
    """Ordered hop list; first hop is the transmitter, last hop is the parent."""
    hops: Tuple[NodeId, ...]

    def __post_init__(self):
        hops = tuple(self.hops)
        object.__setattr__(self, "hops", hops)
        if len(hops) < 2:
            raise InvalidPathError(f"Path needs at least 2 hops, got {list(hops)}")
        if len(set(hops)) != len(hops):
            raise InvalidPathError(f"Path repeats a node: {list(hops)}")

    @property
    def transmitter(self) -> NodeId:
        return self.hops[0]

    @property
    def parent(self) -> NodeId:
        return self.hops[-1]

    @property
    def intermediates(self) -> Tuple[NodeId, ...]:
        return self.hops[1:-1]

    @property
    def hop_count(self) -> int:
        """Number of links traversed."""
        return len(self.hops) - 1

    def __str__(self) -> str:
        return ">".join(str(h) for h in self.hops)
