"""
AEDT - Placement & Traffic

Seeded node placement and the constant-bit-rate transfer schedule. The
schedule is generated up front so every protocol sees the same offered load.
"""

import logging
from typing import List, Sequence

import numpy as np

from .aggregation import TransferRequest
from .models import NodeId, Packet
from .topology import NodeSpec

logger = logging.getLogger(__name__)


def generate_placement(config, rng: np.random.Generator) -> List[NodeSpec]:
    """Uniform random positions inside the deployment area."""
    xs = rng.uniform(0.0, config.area_width, size=config.node_count)
    ys = rng.uniform(0.0, config.area_height, size=config.node_count)
    return [
        NodeSpec((float(x), float(y)), config.initial_energy, config.comm_capacity)
        for x, y in zip(xs, ys)
    ]


def packets_per_transfer(config) -> int:
    return int(round(config.cbr_rate * config.send_interval))


def generate_traffic(config, rng: np.random.Generator, node_ids: Sequence[NodeId]) -> List[TransferRequest]:
    """
    CBR schedule: every `send_interval` seconds `sources_per_interval` sources
    are drawn without replacement, each sending one transfer of
    round(cbr_rate * send_interval) packets at a random offset in the interval.
    """
    count = packets_per_transfer(config)
    sources = min(config.sources_per_interval, len(node_ids))
    if count <= 0 or sources <= 0:
        return []

    slots = int(np.ceil(config.duration / config.send_interval))
    pool = np.array(sorted(node_ids))
    raw = []
    for slot in range(slots):
        chosen = rng.choice(pool, size=sources, replace=False)
        offsets = rng.uniform(0.0, config.send_interval, size=sources)
        priorities = rng.integers(0, config.priority_levels, size=(sources, count))
        for source, offset, prio in zip(chosen.tolist(), offsets.tolist(), priorities.tolist()):
            at = slot * config.send_interval + offset
            if at < config.duration:
                raw.append((at, source, prio))

    raw.sort(key=lambda item: (item[0], item[1]))
    schedule = []
    seq = 0
    for at, source, prio in raw:
        packets = []
        for p in prio:
            packets.append(Packet(seq=seq, source=source, created_at=at, size=config.packet_size_bits, priority=int(p)))
            seq += 1
        schedule.append(TransferRequest(transmitter=source, packets=tuple(packets), submitted_at=at))

    logger.debug(f"Generated {len(schedule)} transfers ({seq} packets) over {config.duration}s")
    return schedule
