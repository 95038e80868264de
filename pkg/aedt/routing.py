"""
AEDT - Path Selection & Memory Table

Greedy energy-aware routing towards the parent: step straight to the parent
when it is a one-hop neighbour, otherwise to the unvisited alive neighbour
with the most available energy. Paths are cached per (parent, transmitter).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx

from .exceptions import DeadNodeError, InvalidPathError, NoPathError
from .models import NodeId, Path
from .topology import NetworkTopology, validate_path

logger = logging.getLogger(__name__)

TableKey = Tuple[NodeId, NodeId]  # (parent, transmitter)


def path_select(source: NodeId, parent: NodeId, network: NetworkTopology) -> Path:
    if source == parent:
        raise ValueError(f"Transmitter {source} is already the parent")
    for node_id in (source, parent):
        if not network.node(node_id).alive:
            raise DeadNodeError(node_id, "route")

    if not nx.has_path(network.alive_graph(), source, parent):
        raise NoPathError(source, parent)

    hops: List[NodeId] = [source]
    visited = {source}
    current = source
    while current != parent:
        neighbours = network.neighbors(current)
        if parent in neighbours:
            current = parent
        else:
            candidates = [n for n in neighbours if n not in visited]
            if not candidates:
                raise NoPathError(source, parent, hops)
            # max energy, ties to the smaller id
            current = min(candidates, key=lambda n: (-network.node(n).e_avail, n))
        hops.append(current)
        visited.add(current)

    path = Path(tuple(hops))
    assert len(set(path.hops)) == len(path.hops), f"cycle in {path}"
    return path


@dataclass
class MemoryTable:
    """Network-wide cache mapping (parent, transmitter) to a path."""
    entries: Dict[TableKey, Path] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tuple[TableKey, Path]]:
        for key in sorted(self.entries):
            yield key, self.entries[key]

    def lookup(self, parent: NodeId, transmitter: NodeId, network: NetworkTopology) -> Optional[Path]:
        path = self.entries.get((parent, transmitter))
        if path is None:
            return None
        dead = [h for h in path.hops if not network.node(h).alive]
        if dead:
            del self.entries[(parent, transmitter)]
            logger.debug(f"Evicted cached path {path}: dead hops {dead}")
            return None
        return path

    def update(self, parent: NodeId, transmitter: NodeId, path: Path, network: NetworkTopology) -> None:
        if path.transmitter != transmitter or path.parent != parent:
            raise InvalidPathError(f"Path {path} does not lead from {transmitter} to {parent}")
        validate_path(path, network)
        self.entries[(parent, transmitter)] = path

    def dumps(self) -> str:
        """One line per entry: parent,transmitter,hop1>hop2>...>hopK"""
        return "".join(f"{p},{t},{path}\n" for (p, t), path in self)

    @classmethod
    def loads(cls, text: str, network: NetworkTopology) -> "MemoryTable":
        table = cls()
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                parent, transmitter, hops = line.split(",")
                path = Path(tuple(int(h) for h in hops.split(">")))
                table.update(int(parent), int(transmitter), path, network)
            except (ValueError, InvalidPathError) as e:
                raise InvalidPathError(f"Memory table line {lineno}: {e}") from e
        return table


def memory_lookup(table: MemoryTable, parent: NodeId, transmitter: NodeId,
                  network: NetworkTopology) -> Optional[Path]:
    return table.lookup(parent, transmitter, network)


def memory_update(table: MemoryTable, parent: NodeId, transmitter: NodeId, path: Path,
                  network: NetworkTopology) -> MemoryTable:
    table.update(parent, transmitter, path, network)
    return table
