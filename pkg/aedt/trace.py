"""
AEDT - Event Trace

Line-oriented record of a run: `time,event_kind,actor,key=value,...`.
Floats are written with repr precision so a parsed trace reproduces the
original values exactly. `-` marks an event without an acting node.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

import pandas as pd


class EventKind(str, Enum):
    START = "start"
    NODE_INIT = "node_init"
    REFRESH = "refresh"
    SUBMIT = "submit"
    RESUBMIT = "resubmit"
    SOURCE_DEAD = "source_dead"
    DELIVER = "deliver"
    DEFER = "defer"
    DROP = "drop"
    UNDELIVERABLE = "undeliverable"
    NODE_DIED = "node_died"
    END = "end"
    CENSUS = "census"


Detail = Tuple[str, Any]


@dataclass(frozen=True)
class TraceEvent:
    time: float
    kind: EventKind
    actor: Optional[int] = None
    details: Tuple[Detail, ...] = ()

    def get(self, key: str, default: Any = None) -> Any:
        for k, v in self.details:
            if k == key:
                return v
        return default

    def as_dict(self) -> Dict[str, Any]:
        row = {"time": self.time, "kind": self.kind.value, "actor": self.actor}
        row.update(self.details)
        return row


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(text: str) -> Any:
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class EventTrace:
    events: List[TraceEvent] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def record(self, time: float, kind: EventKind, actor: Optional[int] = None, **details: Any) -> TraceEvent:
        event = TraceEvent(float(time), kind, actor, tuple(details.items()))
        self.events.append(event)
        return event

    def of_kind(self, kind: EventKind) -> List[TraceEvent]:
        return [e for e in self.events if e.kind is kind]

    def dumps(self) -> str:
        lines = []
        for e in self.events:
            actor = "-" if e.actor is None else str(e.actor)
            parts = [repr(e.time), e.kind.value, actor]
            parts.extend(f"{k}={_format_value(v)}" for k, v in e.details)
            lines.append(",".join(parts))
        return "".join(line + "\n" for line in lines)

    @classmethod
    def loads(cls, text: str) -> "EventTrace":
        trace = cls()
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) < 3:
                raise ValueError(f"Trace line {lineno}: expected time,event_kind,actor[,key=value...]")
            time, kind, actor = parts[:3]
            details = []
            for part in parts[3:]:
                key, sep, value = part.partition("=")
                if not sep:
                    raise ValueError(f"Trace line {lineno}: malformed detail '{part}'")
                details.append((key, _parse_value(value)))
            trace.events.append(TraceEvent(
                time=float(time),
                kind=EventKind(kind),
                actor=None if actor == "-" else int(actor),
                details=tuple(details),
            ))
        return trace

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([e.as_dict() for e in self.events])
