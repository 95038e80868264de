import math

import pytest

from aedt.aggregation import CycleConfig
from aedt.energy import DrainLog, DrainPolicy
from aedt.routing import MemoryTable
from aedt.topology import NodeSpec, build_topology

# Six-node routing fixture, ids A..F = 0..5
A, B, C, D, E, F = range(6)

_ANGLES = {A: 90.0, B: 162.0, C: 234.0, E: 18.0, F: 306.0}
_ENERGY = {A: 50.0, B: 40.0, C: 45.0, D: 20.0, E: 30.0, F: 25.0}


def _on_circle(angle_deg, radius):
    rad = math.radians(angle_deg)
    return (radius * math.cos(rad), radius * math.sin(rad))


def six_node_specs():
    """
    A, B, C, F, E sit on a pentagon of radius 100 (side ~117.6 m, diagonal
    ~190.2 m), D sits 100 m radially outside E. With a 120 m range the edges
    are the pentagon ring A-B-C-F-E-A plus E-D.
    """
    positions = {node: _on_circle(angle, 100.0) for node, angle in _ANGLES.items()}
    positions[D] = _on_circle(_ANGLES[E], 200.0)
    return [NodeSpec(positions[n], _ENERGY[n], 10.0) for n in range(6)]


@pytest.fixture
def six_nodes():
    return build_topology(six_node_specs(), radio_range=120.0)


@pytest.fixture
def line3():
    """0 - 1 - 2 on a line, 10 m apart, range 12."""
    specs = [NodeSpec((0.0, 0.0), 5.0, 10.0), NodeSpec((10.0, 0.0), 5.0, 10.0), NodeSpec((20.0, 0.0), 5.0, 10.0)]
    return build_topology(specs, radio_range=12.0)


@pytest.fixture
def pair():
    """Parent candidate 0 (100 J) next to transmitter 1 (50 J)."""
    specs = [NodeSpec((0.0, 0.0), 100.0, 10.0), NodeSpec((10.0, 0.0), 50.0, 10.0)]
    return build_topology(specs, radio_range=20.0)


@pytest.fixture
def log():
    return DrainLog()


@pytest.fixture
def table():
    return MemoryTable()


@pytest.fixture
def cycle_config():
    return CycleConfig(refresh_interval=1.0, hop_latency=0.01, drain_policy=DrainPolicy(unit_drain=1.0, alpha=0.01))
