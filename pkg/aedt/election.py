"""
AEDT - Parent Election

Every alive node broadcasts its available energy; the richest node becomes
the cycle's parent (aggregator). Energy ties go to the node with more
communication capacity, remaining ties to the smallest NodeId.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .energy import DrainKind, DrainLog, DrainPolicy, drain_node
from .exceptions import NetworkDeadError
from .models import NodeId, NodeRole, NodeState
from .topology import NetworkTopology, set_state

logger = logging.getLogger(__name__)

Contender = Tuple[NodeId, float, float]


@dataclass(frozen=True)
class ElectionResult:
    parent: NodeId
    round: int
    contenders: Tuple[Contender, ...]  # (id, e_avail, comm_capacity) at election time


def broadcast_energy(network: NetworkTopology) -> List[Tuple[NodeId, float]]:
    """Energy census of alive nodes, ordered by NodeId."""
    return [(n.id, n.e_avail) for n in network if n.alive]


def election_key(contender: Contender) -> Tuple[float, float, int]:
    node_id, energy, capacity = contender
    return (energy, capacity, -node_id)


def select_parent(network: NetworkTopology, round: int = 0, now: float = 0.0,
                  policy: Optional[DrainPolicy] = None, log: Optional[DrainLog] = None) -> ElectionResult:
    """
    Elect the parent and apply the post-election duty cycle: the parent is
    awake, every other alive node sleeps.
    """
    census = broadcast_energy(network)
    if not census:
        raise NetworkDeadError("No alive node left to elect")

    if policy is not None and log is not None and policy.broadcast_drain > 0:
        for node_id, _ in census:
            drain_node(network, log, node_id, policy.broadcast_drain, DrainKind.BROADCAST, now)
        census = broadcast_energy(network)
        if not census:
            raise NetworkDeadError("Broadcast cost exhausted every node")

    contenders = tuple((node_id, e, network.node(node_id).comm_capacity) for node_id, e in census)

    # Running maximum over the broadcast census
    best = contenders[0]
    for c in contenders[1:]:
        if election_key(c) > election_key(best):
            best = c
    parent_id = best[0]

    for node in network:
        if not node.alive:
            continue
        if node.id == parent_id:
            continue
        node.role = NodeRole.PLAIN
        set_state(network, node.id, NodeState.SLEEP, now, refreshing=True)

    parent = network.node(parent_id)
    parent.role = NodeRole.PARENT
    set_state(network, parent_id, NodeState.AWAKE, now)
    parent.awake_since = now

    logger.debug(f"Round {round}: parent {parent_id} elected with {parent.e_avail:.4f}J")
    return ElectionResult(parent=parent_id, round=round, contenders=contenders)
