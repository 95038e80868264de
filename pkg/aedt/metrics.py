"""
AEDT - Run Metrics

Computes the evaluation metrics from an event trace:

- Average end-to-end delay over delivered packets
- Delivery ratio (delivered / submitted, 1.0 when nothing was submitted)
- Average energy consumed per node (initial - final)
- Network lifetime (time until the first node runs out of energy)
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import pandas as pd

from .trace import EventKind, EventTrace

SWEEP_COLUMNS = [
    "protocol", "nodes", "seed", "avg_delay_s", "delivery_ratio", "avg_energy_j", "lifetime_s",
]
RUN_COLUMNS = SWEEP_COLUMNS + ["submitted", "delivered", "dropped", "undeliverable", "deferred_pending"]


@dataclass(frozen=True)
class CycleSnapshot:
    index: int
    started_at: float
    parent: Optional[int]
    alive: int
    energy: float  # joules left in the network
    delivered: int = 0
    airtime: float = 0.0  # seconds of channel time used by delivered packets
    utilization: float = 0.0


@dataclass(frozen=True)
class MetricsRecord:
    avg_delay: float
    delivery_ratio: float
    avg_energy_consumed: float
    network_lifetime: float
    per_cycle_series: List[CycleSnapshot] = field(default_factory=list)

    submitted: int = 0
    delivered: int = 0
    dropped: int = 0
    undeliverable: int = 0
    deferred_pending: int = 0

    protocol: str = ""
    node_count: int = 0
    seed: int = 0

    def to_row(self) -> Dict:
        return {
            "protocol": self.protocol,
            "nodes": self.node_count,
            "seed": self.seed,
            "avg_delay_s": self.avg_delay,
            "delivery_ratio": self.delivery_ratio,
            "avg_energy_j": self.avg_energy_consumed,
            "lifetime_s": self.network_lifetime,
            "submitted": self.submitted,
            "delivered": self.delivered,
            "dropped": self.dropped,
            "undeliverable": self.undeliverable,
            "deferred_pending": self.deferred_pending,
        }

    def to_dict(self) -> Dict:
        return asdict(self)


def _rows(df: pd.DataFrame, kind: EventKind) -> pd.DataFrame:
    if df.empty:
        return df
    return df[df["kind"] == kind.value]


def _count(df: pd.DataFrame, kind: EventKind, column: str = "count") -> int:
    rows = _rows(df, kind)
    if rows.empty:
        return 0
    return int(rows[column].sum())


def _cycle_series(df: pd.DataFrame) -> List[CycleSnapshot]:
    refresh = _rows(df, EventKind.REFRESH)
    if refresh.empty:
        return []

    # Attribute every event to the cycle that was running when it was recorded
    cycles = df["cycle"].where(df["kind"] == EventKind.REFRESH.value).ffill()
    deliver_mask = df["kind"] == EventKind.DELIVER.value
    delivered: Dict[int, int] = {}
    channel: Dict[str, Dict[int, float]] = {"airtime": {}, "utilization": {}}
    if deliver_mask.any():
        per_cycle = df.loc[deliver_mask, "count"].groupby(cycles[deliver_mask]).sum()
        delivered = {int(k): int(v) for k, v in per_cycle.items()}
        for column, sums in channel.items():
            if column in df:
                per_cycle = df.loc[deliver_mask, column].fillna(0.0).groupby(cycles[deliver_mask]).sum()
                sums.update({int(k): float(v) for k, v in per_cycle.items()})

    series = []
    for _, row in refresh.iterrows():
        index = int(row["cycle"])
        parent = None if pd.isna(row["actor"]) else int(row["actor"])
        series.append(CycleSnapshot(
            index=index,
            started_at=float(row["time"]),
            parent=parent,
            alive=int(row["alive"]),
            energy=float(row["energy"]),
            delivered=delivered.get(index, 0),
            airtime=channel["airtime"].get(index, 0.0),
            utilization=channel["utilization"].get(index, 0.0),
        ))
    return series


def collect_metrics(trace: EventTrace) -> MetricsRecord:
    """Recompute the run metrics from its trace."""
    if not len(trace):
        return MetricsRecord(avg_delay=0.0, delivery_ratio=1.0, avg_energy_consumed=0.0, network_lifetime=0.0)

    df = trace.to_frame()
    start = trace.of_kind(EventKind.START)
    end = trace.of_kind(EventKind.END)
    meta = start[0] if start else None
    duration = end[-1].get("duration") if end else df["time"].max()

    submitted = _count(df, EventKind.SUBMIT)
    delivered = _count(df, EventKind.DELIVER)
    dropped = _count(df, EventKind.DROP)
    undeliverable = _count(df, EventKind.UNDELIVERABLE)
    pending = int(end[-1].get("pending", 0)) if end else 0

    avg_delay = 0.0
    deliveries = _rows(df, EventKind.DELIVER)
    if delivered:
        avg_delay = float((deliveries["count"] * deliveries["delay"]).sum() / deliveries["count"].sum())

    initial = _rows(df, EventKind.NODE_INIT)
    census = _rows(df, EventKind.CENSUS)
    avg_energy = 0.0
    if not initial.empty and not census.empty:
        start_energy = initial.set_index("node")["energy"].sort_index()
        final_energy = census.set_index("node")["energy"].sort_index()
        avg_energy = float((start_energy - final_energy).mean())

    # Deaths are recorded when processed; `died_at` is when the energy ran out
    deaths = _rows(df, EventKind.NODE_DIED)
    lifetime = float(duration)
    if not deaths.empty:
        died_at = deaths["died_at"].fillna(deaths["time"]) if "died_at" in deaths else deaths["time"]
        lifetime = min(float(died_at.min()), float(duration))

    return MetricsRecord(
        avg_delay=avg_delay,
        delivery_ratio=delivered / submitted if submitted else 1.0,
        avg_energy_consumed=avg_energy,
        network_lifetime=lifetime,
        per_cycle_series=_cycle_series(df),
        submitted=submitted,
        delivered=delivered,
        dropped=dropped,
        undeliverable=undeliverable,
        deferred_pending=pending,
        protocol=str(meta.get("protocol", "")) if meta else "",
        node_count=int(meta.get("nodes", 0)) if meta else len(initial),
        seed=int(meta.get("seed", 0)) if meta else 0,
    )
