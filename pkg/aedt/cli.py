"""
AEDT - Command Line

    python main.py run   [--config FILE] [--seed N] [--nodes N] [--protocol P] ... [--out DIR]
    python main.py sweep [--config FILE] [--node-counts 20,40,...] [--protocols aedt,static-tree] [--jobs N]

`run` writes metrics.csv, metrics.json, trace.log and config.env (the echo, usable as
--config to reproduce the run). `sweep` writes sweep.csv with one row per
(protocol, node count).
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from .exceptions import AEDTError, ConfigError
from .metrics import RUN_COLUMNS, SWEEP_COLUMNS, MetricsRecord
from .scenario import Protocol, ScenarioConfig, load_scenario
from .simulator import run, sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

DEFAULT_NODE_COUNTS = [20, 40, 60, 80, 100]
DEFAULT_PROTOCOLS = [Protocol.AEDT.value, Protocol.STATIC_TREE.value]


@dataclass
class RunArtifact:
    config: ScenarioConfig
    metrics: MetricsRecord
    paths: Dict[str, Path] = field(default_factory=dict)


def _write_csv(rows: List[Dict], columns: List[str], path: Path) -> None:
    frame = pd.DataFrame(rows, columns=columns)
    frame.to_csv(path, index=False, lineterminator="\n")


def write_run_artifact(config: ScenarioConfig, record: MetricsRecord, trace_text: str, out_dir: Path) -> RunArtifact:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "metrics": out_dir / "metrics.csv",
        "trace": out_dir / "trace.log",
        "config": out_dir / "config.env",
        "json": out_dir / "metrics.json",
    }
    _write_csv([record.to_row()], RUN_COLUMNS, paths["metrics"])
    paths["trace"].write_text(trace_text, encoding="utf-8")
    paths["config"].write_text(config.to_env_text(), encoding="utf-8")
    # Full record including the per-cycle series, for plotting
    paths["json"].write_text(json.dumps(record.to_dict(), indent=2) + "\n", encoding="utf-8")
    return RunArtifact(config=config, metrics=record, paths=paths)


def write_sweep_csv(records: Sequence[MetricsRecord], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    _write_csv([{k: r.to_row()[k] for k in SWEEP_COLUMNS} for r in records], SWEEP_COLUMNS, path)
    return path


def _load(config_path: Optional[str], overrides: Dict) -> ScenarioConfig:
    return load_scenario(config_path).with_overrides(**overrides)


def cmd_run(config_path: Optional[str], overrides: Dict, out_dir: str) -> int:
    try:
        config = _load(config_path, overrides)
        record, trace = run(config)
        artifact = write_run_artifact(config, record, trace.dumps(), Path(out_dir))
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except (AEDTError, OSError) as e:
        print(f"❌ Run failed: {e}", file=sys.stderr)
        return EXIT_FAILURE

    print(
        f"✅ {config.protocol.value} | nodes {config.node_count} | seed {config.seed} | "
        f"delay {record.avg_delay:.4f}s | delivery {record.delivery_ratio:.3f} | "
        f"energy {record.avg_energy_consumed:.4f}J | lifetime {record.network_lifetime:.2f}s "
        f"-> {artifact.paths['metrics'].parent}"
    )
    return EXIT_OK


def cmd_sweep(config_path: Optional[str], node_counts: Sequence[int], protocols: Sequence[str],
              out_dir: str, jobs: int = 1, overrides: Optional[Dict] = None) -> int:
    if not protocols:
        print("usage error: at least one protocol is required", file=sys.stderr)
        return EXIT_USAGE
    if not node_counts:
        print("usage error: at least one node count is required", file=sys.stderr)
        return EXIT_USAGE

    records: List[MetricsRecord] = []
    try:
        base = _load(config_path, overrides or {})
        for protocol in protocols:
            config = base.with_overrides(protocol=protocol)
            records.extend(sweep(config, node_counts, jobs=jobs))
        path = write_sweep_csv(records, Path(out_dir) / "sweep.csv")
    except ConfigError as e:
        print(f"❌ Config error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except (AEDTError, OSError) as e:
        print(f"❌ Sweep failed: {e}", file=sys.stderr)
        return EXIT_FAILURE

    print(f"✅ Sweep complete: {len(records)} run(s) -> {path}")
    return EXIT_OK


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def _name_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser(default_out: str = "results") -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aedt", description="Energy-aware data aggregation tree simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key=value scenario file")
        p.add_argument("--seed", type=int)
        p.add_argument("--duration", type=float)
        p.add_argument("--refresh-interval", type=float)
        p.add_argument("--overload-policy", choices=["wait", "prioritize"])
        p.add_argument("--out", default=default_out, help=f"output directory (default: {default_out})")

    run_p = sub.add_parser("run", help="single simulation run")
    common(run_p)
    run_p.add_argument("--nodes", type=int)
    run_p.add_argument("--protocol", choices=[p.value for p in Protocol])

    sweep_p = sub.add_parser("sweep", help="node-count sweep across protocols")
    common(sweep_p)
    sweep_p.add_argument("--node-counts", type=_int_list, default=DEFAULT_NODE_COUNTS)
    sweep_p.add_argument("--protocols", type=_name_list, default=DEFAULT_PROTOCOLS)
    sweep_p.add_argument("--jobs", type=int, default=1, help="parallel runs")
    return parser


def _overrides(args: argparse.Namespace) -> Dict:
    overrides = {
        "seed": args.seed,
        "duration": args.duration,
        "refresh_interval": args.refresh_interval,
        "overload_policy": args.overload_policy,
    }
    if args.command == "run":
        overrides["node_count"] = args.nodes
        overrides["protocol"] = args.protocol
    return {k: v for k, v in overrides.items() if v is not None}


def main(argv: Optional[Sequence[str]] = None, default_out: str = "results") -> int:
    parser = build_parser(default_out)
    args = parser.parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    if args.command == "run":
        return cmd_run(args.config, _overrides(args), args.out)

    unknown = [p for p in args.protocols if p not in {x.value for x in Protocol}]
    if unknown:
        parser.error(f"unknown protocol(s): {', '.join(unknown)}")
    return cmd_sweep(args.config, args.node_counts, args.protocols, args.out,
                     jobs=args.jobs, overrides=_overrides(args))
