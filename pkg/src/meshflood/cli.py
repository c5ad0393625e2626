"""Command-line front end: run scenarios, paired comparisons, oracle checks.

Exit codes: 0 success, 2 configuration error (bad scenario file, size cap),
3 accounting-invariant violation, 4 oracle coverage failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .engine import MODE_BLIND, MODE_RELAY, SimConfig, run
from .errors import AccountingError, ConfigError, MeshFloodError, SizeLimitError
from .fixtures import build_scenario_topology
from .metrics import compare, export_csv, export_summary, summarize
from .relays import (
    brute_force_min_relays,
    coverage_check,
    dump_relays,
    select_relays,
)
from .scenario import load_scenario
from .topology import Topology, save_topology

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ACCOUNTING = 3
EXIT_ORACLE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshflood",
        description="Deterministic mesh-network flooding simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario")
    run_p.add_argument("scenario", help="scenario file path")
    run_p.add_argument("--mode", choices=[MODE_RELAY, MODE_BLIND])
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--out", default="out", help="output directory")
    run_p.add_argument("--dump-relays", action="store_true")
    run_p.add_argument("--dump-topology", action="store_true")
    run_p.add_argument("--rule2", choices=["on", "off"])
    run_p.add_argument("--inflight", choices=["deliver", "drop"])
    run_p.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="run this many consecutive seeds concurrently, one subdirectory each",
    )

    cmp_p = sub.add_parser("compare", help="run relay and blind modes, same seed")
    cmp_p.add_argument("scenario")
    cmp_p.add_argument("--seed", type=int)
    cmp_p.add_argument("--out", default="out")
    cmp_p.add_argument("--rule2", choices=["on", "off"])
    cmp_p.add_argument("--inflight", choices=["deliver", "drop"])

    orc_p = sub.add_parser("oracle", help="heuristic vs exact minimum relay set")
    orc_p.add_argument("scenario")
    orc_p.add_argument("--max-n", type=int, default=12)
    return parser


def _apply_overrides(cfg: SimConfig, args: argparse.Namespace) -> SimConfig:
    updates = {}
    if getattr(args, "mode", None) is not None:
        updates["mode"] = args.mode
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "rule2", None) is not None:
        updates["rule2"] = args.rule2 == "on"
    if getattr(args, "inflight", None) is not None:
        updates["inflight"] = args.inflight
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
        cfg.validate()
    return cfg


def _scenario_topology(cfg: SimConfig) -> Topology:
    return build_scenario_topology(
        fixture=cfg.fixture,
        node_count=cfg.node_count,
        placement=cfg.placement,
        area_side=cfg.area_side,
        radio_range=cfg.radio_range,
        seed=cfg.seed,
    )


def _run_one(
    cfg: SimConfig, out_dir: Path, dump_topology: bool, dump_relay_sets: bool
) -> int:
    topo = _scenario_topology(cfg)
    series = run(cfg, topo)
    out_dir.mkdir(parents=True, exist_ok=True)
    export_csv(series, out_dir / "series.csv")
    export_summary(summarize(series), out_dir / "summary.txt")
    if dump_topology:
        save_topology(topo, out_dir / "topology.txt")
    if dump_relay_sets:
        assignment = select_relays(topo, cfg.relay_order)
        (out_dir / "relays.txt").write_text(dump_relays(assignment), encoding="utf-8")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_scenario(args.scenario), args)
    out = Path(args.out)
    if args.jobs <= 1:
        return _run_one(cfg, out, args.dump_topology, args.dump_relays)

    jobs = [
        (
            dataclasses.replace(cfg, seed=cfg.seed + i),
            out / f"seed-{cfg.seed + i}",
            args.dump_topology,
            args.dump_relays,
        )
        for i in range(args.jobs)
    ]
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        codes = list(pool.map(_run_one_star, jobs))
    return max(codes)


def _run_one_star(job) -> int:
    return _run_one(*job)


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_scenario(args.scenario), args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    summaries = {}
    for mode in (MODE_RELAY, MODE_BLIND):
        mode_cfg = dataclasses.replace(cfg, mode=mode)
        series = run(mode_cfg, _scenario_topology(mode_cfg))
        export_csv(series, out / f"series_{mode}.csv")
        summaries[mode] = summarize(series)
        export_summary(summaries[mode], out / f"summary_{mode}.txt")

    report = compare(summaries[MODE_RELAY], summaries[MODE_BLIND])
    export_summary(report, out / "compare.txt")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.scenario)
    topo = _scenario_topology(cfg)
    assignment = select_relays(topo, cfg.relay_order)
    optimal = brute_force_min_relays(topo, args.max_n)
    if coverage_check(topo, assignment.relays):
        print("heuristic relay set fails coverage", file=sys.stderr)
        return EXIT_ORACLE
    heuristic_size = len(assignment.relays)
    optimal_size = len(optimal)
    ratio = heuristic_size / optimal_size if optimal_size else 1.0
    print(f"heuristic={heuristic_size} optimal={optimal_size} ratio={ratio}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "compare": cmd_compare, "oracle": cmd_oracle}
    try:
        return handlers[args.command](args)
    except (ConfigError, SizeLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AccountingError as exc:
        print(f"accounting violation: {exc}", file=sys.stderr)
        return EXIT_ACCOUNTING
    except MeshFloodError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
