"""
AEDT - Network Topology

Disc-model connectivity graph over a set of sensor nodes, plus the
sleep/awake state machine.
"""

import copy
import logging
import math
from typing import Dict, Iterator, List, NamedTuple, Sequence, Tuple

import networkx as nx
import numpy as np

from .exceptions import DeadNodeError, InvalidPathError, StateTransitionError, TopologyError
from .models import NodeId, NodeRole, NodeState, Path, Position, SensorNode

logger = logging.getLogger(__name__)


class NodeSpec(NamedTuple):
    position: Position
    initial_energy: float
    comm_capacity: float


class NetworkTopology:
    """
    Node set plus the symmetric radio-range graph.

    Edges carry a `distance` attribute in meters. Dead nodes stay in the
    census but are skipped by `neighbors()` and `alive_graph()`.
    """

    def __init__(self, nodes: Dict[NodeId, SensorNode], radio_range: float, graph: nx.Graph):
        self._nodes = nodes
        self.radio_range = radio_range
        self.graph = graph

    def __len__(self) -> int:
        return len(self._nodes)

    def __iter__(self) -> Iterator[SensorNode]:
        for node_id in sorted(self._nodes):
            yield self._nodes[node_id]

    def node(self, node_id: NodeId) -> SensorNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise TopologyError(f"Unknown node {node_id}") from None

    def node_ids(self) -> List[NodeId]:
        return sorted(self._nodes)

    def alive_ids(self) -> List[NodeId]:
        return [n.id for n in self if n.alive]

    def edges(self) -> List[Tuple[NodeId, NodeId]]:
        return sorted((min(u, v), max(u, v)) for u, v in self.graph.edges())

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def connected(self, i: NodeId, j: NodeId) -> bool:
        return self.graph.has_edge(i, j)

    def distance(self, i: NodeId, j: NodeId) -> float:
        if self.graph.has_edge(i, j):
            return self.graph.edges[i, j]["distance"]
        a, b = self.node(i).position, self.node(j).position
        return math.dist(a, b)

    def neighbors(self, node_id: NodeId, alive_only: bool = True) -> List[NodeId]:
        found = sorted(self.graph.neighbors(node_id))
        if alive_only:
            found = [n for n in found if self._nodes[n].alive]
        return found

    def alive_graph(self) -> nx.Graph:
        return self.graph.subgraph(self.alive_ids())

    def awake_ids(self) -> List[NodeId]:
        return [n.id for n in self if n.state is NodeState.AWAKE]

    def energy_census(self) -> Dict[NodeId, float]:
        return {n.id: n.e_avail for n in self}

    def total_energy(self) -> float:
        return math.fsum(n.e_avail for n in self)

    def copy(self) -> "NetworkTopology":
        """Independent snapshot (safe to hand to another thread)."""
        return copy.deepcopy(self)


def build_topology(node_specs: Sequence[NodeSpec], radio_range: float) -> NetworkTopology:
    """
    Build a topology from (position, initial_energy, comm_capacity) specs.

    NodeIds are assigned 0..n-1 in input order. Two nodes are connected iff
    their euclidean distance is <= radio_range.
    """
    if not node_specs:
        raise TopologyError("A topology needs at least one node")
    if radio_range <= 0:
        raise TopologyError(f"radio_range must be positive, got {radio_range}")

    specs = [NodeSpec(*s) for s in node_specs]
    seen = {}
    for idx, spec in enumerate(specs):
        pos = (float(spec.position[0]), float(spec.position[1]))
        if pos in seen:
            raise TopologyError(f"Nodes {seen[pos]} and {idx} share position {pos}")
        seen[pos] = idx
        if spec.initial_energy <= 0:
            raise TopologyError(f"Node {idx}: initial energy must be positive")
        if spec.comm_capacity <= 0:
            raise TopologyError(f"Node {idx}: communication capacity must be positive")

    positions = np.array([s.position for s in specs], dtype=float)
    dist = np.linalg.norm(positions[:, None, :] - positions[None, :, :], axis=-1)

    graph = nx.Graph()
    nodes: Dict[NodeId, SensorNode] = {}
    for idx, spec in enumerate(specs):
        nodes[idx] = SensorNode(
            id=idx,
            position=(float(spec.position[0]), float(spec.position[1])),
            e_avail=float(spec.initial_energy),
            comm_capacity=float(spec.comm_capacity),
        )
        graph.add_node(idx)

    rows, cols = np.nonzero(np.triu(dist <= radio_range, k=1))
    for i, j in zip(rows.tolist(), cols.tolist()):
        graph.add_edge(i, j, distance=float(dist[i, j]))

    logger.debug(f"Built topology: {len(nodes)} nodes, {graph.number_of_edges()} edges, range {radio_range}m")
    return NetworkTopology(nodes, float(radio_range), graph)


def set_state(topology: NetworkTopology, node_id: NodeId, new_state: NodeState,
              now: float = 0.0, refreshing: bool = False) -> SensorNode:
    """
    Move a node between Sleep and Awake.

    Waking starts the awake-duration clock, sleeping stops it. The current
    parent may only be put to sleep during a refresh transition.
    """
    node = topology.node(node_id)
    if not node.alive:
        raise DeadNodeError(node_id, f"change state to {new_state.value}")

    if node.state is new_state:
        return node

    if new_state is NodeState.SLEEP:
        if node.role is NodeRole.PARENT and not refreshing:
            raise StateTransitionError(f"Parent {node_id} must stay awake until the network refreshes")
        node.state = NodeState.SLEEP
        node.awake_since = None
    else:
        node.state = NodeState.AWAKE
        node.awake_since = now
    return node


def validate_path(path: Path, topology: NetworkTopology) -> Path:
    """Check every consecutive hop pair is an edge of the topology."""
    for hop in path.hops:
        topology.node(hop)
    for a, b in zip(path.hops, path.hops[1:]):
        if not topology.connected(a, b):
            raise InvalidPathError(f"Path {path}: {a} and {b} are not neighbours")
    return path
