"""Command-line interface.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bounds as bnd
from .geomnet import connectivity, deploy, occupancy_profile, radio_params, tessellate
from .harness import (ConfigError, ExperimentConfig, RunRecord, load_config,
                      records_from_json, report, run_cell, run_config, resolve_tau)
from .oracle import bfs_hops


def _print_record(rec: RunRecord) -> None:
    for name in ("protocol", "n", "seed", "p", "tau", "t_phase1", "t_sink", "t_all",
                 "total_tx", "correct", "hop_match_frac", "rounds_ok", "rounds_total"):
        value = getattr(rec, name)
        if value is not None:
            print(f"  {name:15s} {value}")


def cmd_deploy(args) -> int:
    dep = deploy(args.n, args.seed)
    grid = tessellate(args.n)
    radio = radio_params(args.n, args.delta_prime)
    counts, within = occupancy_profile(dep, grid)
    connected, sizes = connectivity(dep, radio.radius)
    print(f"n={dep.n} seed={dep.seed} sink at (0, 0)")
    print(f"grid: {grid.cells_per_side}x{grid.cells_per_side} cells of side "
          f"{grid.cell_side:.6g} ({grid.cell_count} cells)")
    print(f"radio: radius={radio.radius:.6g} delta_prime={radio.delta_prime} "
          f"k1={radio.interference_cells} p={radio.tx_prob:.6g}")
    print(f"occupancy: min={counts.min()} max={counts.max()} within_band={within}")
    print(f"connected: {connected} (components: {sizes[:5]}{'...' if len(sizes) > 5 else ''})")
    print(f"max hop (breadth-first): {bfs_hops(dep, radio.radius).max()}")
    return 0


def cmd_bounds(args) -> int:
    consts = bnd.analysis_constants(args.n, args.delta_prime)
    pb = bnd.phase_bounds(args.n, args.alpha, args.k, args.delta_prime)
    print(f"analysis constants for n={args.n} (delta_prime={args.delta_prime}):")
    print(f"  c1={consts.c1} c2={consts.c2} m={consts.max_cell_nodes} "
          f"k1={consts.interference_cells}")
    print(f"  p={consts.tx_prob:.6g} p_S={consts.cell_success_prob:.6g}")
    print(f"  l_n={consts.cells_per_side} M_n={consts.cell_count} "
          f"w={consts.column_chain_len} d={consts.hop_bound}")
    print(f"slot thresholds at alpha={args.alpha} k={args.k}:")
    print(f"  {'phase':8s} {'slots':>14s}")
    print(f"  {'V1':8s} {pb.v1:>14d}")
    print(f"  {'V2':8s} {pb.v2:>14d}")
    print(f"  {'V3':8s} {pb.v3:>14d}")
    print(f"  {'total':8s} {pb.v1 + pb.v2 + pb.v3:>14d}")
    return 0


def _single_cfg(args, protocol: str, **extra) -> ExperimentConfig:
    raw = dict(protocol=protocol, n_list=[args.n], seeds=[args.seed],
               master_seed=args.master_seed, delta_prime=args.delta_prime, **extra)
    if getattr(args, "p", None) is not None:
        raw["p_policy"] = {"override": args.p}
    if getattr(args, "max_slots", None) is not None:
        raw["max_slots"] = args.max_slots
    cfg = ExperimentConfig(**raw)
    cfg.validate()
    return cfg


def cmd_oneshot(args) -> int:
    cfg = _single_cfg(args, "one_shot", data_mode=args.data, until=args.until)
    rec = run_cell(cfg, args.n, args.seed, None)
    _print_record(rec)
    if not rec.completed:
        print("  note: max_slots exhausted before all events fired")
    return 0


def cmd_hops(args) -> int:
    tau_policy = ({"empirical_quantile": args.tau_quantile} if args.tau is None
                  else {"analytic": {"alpha": 1.0, "k": 1.0}})
    cfg = _single_cfg(args, "hops", tau_policy=tau_policy)
    tau = args.tau if args.tau is not None else resolve_tau(cfg, args.n)
    rec = run_cell(cfg, args.n, args.seed, tau)
    _print_record(rec)
    return 0


def cmd_pipelined(args) -> int:
    tau_policy = ({"empirical_quantile": args.tau_quantile} if args.tau is None
                  else {"analytic": {"alpha": 1.0, "k": 1.0}})
    cfg = _single_cfg(args, "pipelined", rounds=args.rounds, data_mode=args.data,
                      tau_policy=tau_policy, hops_source=args.hops_source)
    tau = args.tau if args.tau is not None else resolve_tau(cfg, args.n)
    rec = run_cell(cfg, args.n, args.seed, tau)
    _print_record(rec)
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    records = run_config(cfg)
    stem = cfg.out if cfg.out else "sweep"
    paths = report(records, stem, formats=cfg.formats,
                   include_wallclock=cfg.include_wallclock)
    for path in paths:
        print(path)
    return 0


def cmd_report(args) -> int:
    records = records_from_json(args.infile)
    if not records:
        raise ConfigError(f"no records found in {args.infile}")
    stem = args.out if args.out else args.infile.rsplit(".", 1)[0] + "_report"
    for path in report(records, stem, formats=[args.format]):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alohamax",
        description="Simulate and analyse in-network MAX computation over "
                    "random multihop Aloha networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--n", type=int, required=True, help="number of nodes")
        if seed:
            p.add_argument("--seed", type=int, default=1)
            p.add_argument("--master-seed", dest="master_seed", type=int, default=0)
        p.add_argument("--delta-prime", dest="delta_prime", type=float, default=0.0)

    p = sub.add_parser("deploy", help="inspect a deployment")
    common(p)
    p.set_defaults(func=cmd_deploy)

    p = sub.add_parser("bounds", help="print analysis constants and slot thresholds")
    common(p, seed=False)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--k", type=float, default=1.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("oneshot", help="run one one-shot MAX diffusion")
    common(p)
    p.add_argument("--data", default="single_far_corner",
                   choices=["single_far_corner", "all_zero"])
    p.add_argument("--p", type=float, default=None, help="override transmit probability")
    p.add_argument("--max-slots", dest="max_slots", type=int, default=None)
    p.add_argument("--until", default="all", choices=["all", "sink", "phase1"])
    p.set_defaults(func=cmd_oneshot)

    p = sub.add_parser("hops", help="run hop-distance compute against the BFS oracle")
    common(p)
    p.add_argument("--tau", type=int, default=None, help="frames per superframe")
    p.add_argument("--tau-quantile", dest="tau_quantile", type=float, default=0.999)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--max-slots", dest="max_slots", type=int, default=None)
    p.set_defaults(func=cmd_hops)

    p = sub.add_parser("pipelined", help="run the pipelined MAX protocol")
    common(p)
    p.add_argument("--rounds", type=int, default=50)
    p.add_argument("--tau", type=int, default=None, help="slots per round")
    p.add_argument("--tau-quantile", dest="tau_quantile", type=float, default=0.999)
    p.add_argument("--data", default="single_far_corner",
                   choices=["single_far_corner", "all_zero"])
    p.add_argument("--bernoulli-q", dest="bernoulli_q", type=float, default=None)
    p.add_argument("--hops-source", dest="hops_source", default="bfs",
                   choices=["bfs", "protocol"])
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--max-slots", dest="max_slots", type=int, default=None)
    p.set_defaults(func=cmd_pipelined)

    p = sub.add_parser("sweep", help="run a sweep described by a JSON config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="convert a records JSON file to csv/json/svg")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", required=True, choices=["csv", "json", "svg"])
    p.add_argument("--out", default=None, help="output path stem")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if getattr(args, "bernoulli_q", None) is not None:
            args.data = {"bernoulli": args.bernoulli_q}
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
