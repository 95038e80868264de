"""
AEDT - Exceptions

Every error raised by the simulator library derives from AEDTError.
"""

from typing import Optional


class AEDTError(Exception):
    """Base class for simulator errors."""


class TopologyError(AEDTError):
    """Invalid node set or radio range."""


class DeadNodeError(AEDTError):
    """An operation addressed a node whose energy is exhausted."""

    def __init__(self, node_id: int, action: str = "act"):
        super().__init__(f"Node {node_id} is dead and cannot {action}")
        self.node_id = node_id


class StateTransitionError(AEDTError):
    """A sleep/awake transition that the duty-cycle rules forbid."""


class NetworkDeadError(AEDTError):
    """No alive node is left to elect."""


class NoPathError(AEDTError):
    """The greedy walk hit a dead end before reaching the parent."""

    def __init__(self, source: int, parent: int, reached: Optional[list] = None):
        hops = ">".join(str(h) for h in reached or [source])
        super().__init__(f"No path from {source} to parent {parent} (stopped at {hops})")
        self.source = source
        self.parent = parent
        self.reached = list(reached or [source])


class InvalidPathError(AEDTError):
    """A hop list that violates the path invariants for a topology."""


class TraceCoverageError(AEDTError):
    """A sampled trace does not cover the requested integration window."""


class FormulaDomainError(AEDTError, ValueError):
    """An energy or capacity formula was evaluated outside its domain."""


class ConfigError(AEDTError):
    """A scenario file or override that cannot be turned into a ScenarioConfig."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.field = field
