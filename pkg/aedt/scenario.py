"""
AEDT - Scenario Configuration

ScenarioConfig holds every knob of a simulation run. Defaults follow the
reference deployment: 500 x 500 m area, 3.1 J per node, 2 Mbps channel,
10 packets/s communication capacity.

Scenario files are flat `key=value` documents (the `.env` grammar) whose
keys are the field names below. `to_env_text()` writes the same format, so
the config echo of a run reproduces it exactly.
"""

import io
import logging
import re
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .aggregation import CycleConfig, OverloadMode, OverloadPolicy
from .energy import DrainPolicy
from .exceptions import ConfigError

logger = logging.getLogger(__name__)

_LINE = re.compile(r"^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=(.*)$")


class Protocol(str, Enum):
    AEDT = "aedt"
    AEDT_NOSLEEP = "aedt-nosleep"
    STATIC_TREE = "static-tree"


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, use_enum_values=False)

    # Deployment
    area_width: float = Field(500.0, gt=0)
    area_height: float = Field(500.0, gt=0)
    node_count: int = Field(20, ge=2)
    radio_range: float = Field(120.0, gt=0)
    initial_energy: float = Field(3.1, gt=0)
    comm_capacity: float = Field(10.0, gt=0)
    bandwidth_bps: float = Field(2e6, gt=0)

    # Timing
    refresh_interval: float = Field(1.0, gt=0)
    duration: float = Field(60.0, gt=0)
    hop_latency: float = Field(0.01, ge=0)

    # CBR traffic
    cbr_rate: float = Field(3.0, ge=0)
    send_interval: float = Field(1.0, gt=0)
    sources_per_interval: int = Field(2, ge=0)
    packet_size_bits: int = Field(1024, gt=0)
    priority_levels: int = Field(4, ge=1)

    # Protocol behaviour
    protocol: Protocol = Protocol.AEDT
    overload_policy: OverloadMode = OverloadMode.WAIT
    prioritize_spill: bool = False
    path_cache: bool = True

    # Energy drains
    unit_drain: float = Field(1.0, ge=0)
    alpha: float = Field(0.01, ge=0)
    parent_cycle_drain: float = Field(0.0, ge=0)
    broadcast_drain: float = Field(0.0, ge=0)

    seed: int = Field(42, ge=0, lt=2 ** 64)

    @model_validator(mode="after")
    def check_send_interval(self):
        if self.send_interval > self.duration:
            raise ValueError("send_interval must not exceed duration")
        return self

    # --- derived settings -------------------------------------------------

    def drain_policy(self) -> DrainPolicy:
        return DrainPolicy(
            unit_drain=self.unit_drain,
            alpha=self.alpha,
            parent_cycle_drain=self.parent_cycle_drain,
            broadcast_drain=self.broadcast_drain,
        )

    def overload(self) -> OverloadPolicy:
        return OverloadPolicy(mode=self.overload_policy, spill=self.prioritize_spill)

    def cycle_config(self) -> CycleConfig:
        return CycleConfig(
            refresh_interval=self.refresh_interval,
            hop_latency=self.hop_latency,
            overload_policy=self.overload(),
            drain_policy=self.drain_policy(),
            path_cache=self.path_cache,
            sleep_enabled=self.protocol is Protocol.AEDT,
            bandwidth_bps=self.bandwidth_bps,
        )

    def with_overrides(self, **overrides: Any) -> "ScenarioConfig":
        """New config with `overrides` applied and re-validated."""
        values = self.model_dump()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return validate_scenario(values)

    def to_env_text(self) -> str:
        lines = []
        for name, value in self.model_dump().items():
            if isinstance(value, Enum):
                value = value.value
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{name}={value}")
        return "\n".join(lines) + "\n"


def validate_scenario(values: Mapping[str, Any], lines: Optional[Dict[str, int]] = None) -> ScenarioConfig:
    """Build a ScenarioConfig, turning validation errors into ConfigError."""
    lines = lines or {}
    try:
        return ScenarioConfig.model_validate(dict(values))
    except ValidationError as e:
        first = e.errors()[0]
        field = str(first["loc"][0]) if first.get("loc") else None
        raise ConfigError(first["msg"], line=lines.get(field), field=field) from None


def parse_scenario(text: str, source: str = "<scenario>") -> ScenarioConfig:
    """Parse a key=value scenario document."""
    known = set(ScenarioConfig.model_fields)
    lines: Dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = _LINE.match(raw)
        if not match:
            raise ConfigError(f"expected key=value in {source}", line=lineno)
        key = match.group(1)
        if key not in known:
            raise ConfigError(f"unknown setting in {source}", line=lineno, field=key)
        if key in lines:
            raise ConfigError(f"duplicate setting (first on line {lines[key]})", line=lineno, field=key)
        lines[key] = lineno

    values = {k: v for k, v in dotenv_values(stream=io.StringIO(text)).items() if v is not None}
    return validate_scenario(values, lines)


def load_scenario(path: Optional[str]) -> ScenarioConfig:
    """Read a scenario file; no path (or an empty file) gives the defaults."""
    if not path:
        return ScenarioConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read scenario file {path}: {e.strerror}") from None
    logger.debug(f"Loaded scenario file {path}")
    return parse_scenario(text, source=path)
