"""Command line: ``maxtour {gen,solve,compare,sweep,verify}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .bench import (
    ALGORITHMS,
    ConfigError,
    ExperimentConfig,
    emit,
    generate_instance,
    instance_seed,
    read_instance,
    run_comparison,
    run_curvature_sweep,
    solve,
    write_instance,
)
from .exact import verify_certificates
from .objectives import CombinedCostOracle, curvature, edge_lengths

log = logging.getLogger("maxtour")


def _int_list(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x]


def _str_list(s: str) -> list[str]:
    return [x for x in s.split(",") if x]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--sizes", type=_int_list, help="comma-separated vertex counts")
    p.add_argument("--algos", type=_str_list, help=f"comma-separated, from {','.join(ALGORITHMS)}")
    p.add_argument("--out", type=Path)
    p.add_argument("--grid-h", type=float, dest="grid_h")
    p.add_argument("--beta", type=float)
    p.add_argument("--mode", choices=["raw", "normalized", "shifted"])


def load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        cfg = ExperimentConfig.from_dict(json.loads(args.config.read_text()))
    overrides = {
        "seed": args.seed,
        "sizes": args.sizes,
        "algorithms": args.algos,
        "grid_h": args.grid_h,
        "beta": args.beta,
        "mode": args.mode,
    }
    for key in ("instances", "thickness", "thickness_grid", "directed"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    if args.beta is not None or args.mode is not None:
        cfg = replace(cfg, cost="euclidean")
    return cfg


def _with_costs(inst, oracle, args):
    if args.beta is None and args.mode is None:
        return oracle
    if isinstance(oracle, CombinedCostOracle):
        return CombinedCostOracle(oracle.base, oracle.costs, args.beta if args.beta is not None else oracle.beta,
                                  args.mode or oracle.mode)
    return CombinedCostOracle(oracle, edge_lengths(inst), args.beta or 0.0, args.mode or "raw")


def cmd_gen(args) -> int:
    cfg = load_config(args)
    out = args.out or Path("instances")
    out.mkdir(parents=True, exist_ok=True)
    for n in cfg.sizes:
        for i in range(cfg.instances):
            seed = instance_seed(cfg.seed, n, i)
            _, _, doc = generate_instance(cfg.spec(n, seed))
            path = out / f"n{n}_i{i:03d}.json"
            write_instance(path, doc)
            print(path)
    return 0


def cmd_solve(args) -> int:
    inst, oracle, _ = read_instance(args.instance)
    oracle = _with_costs(inst, oracle, args)
    algos = args.algos or ["GT"]
    reports = [solve(a, inst, oracle, args.seed or 0).to_dict() for a in algos]
    text = json.dumps(reports, indent=1, sort_keys=True)
    if args.out:
        args.out.write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_compare(args) -> int:
    cfg = load_config(args)
    results = run_comparison(cfg)
    formats = ("csv", "text", "timings") if args.timings else ("csv", "text")
    for p in emit(results, args.out or Path("results"), formats):
        log.info("wrote %s", p)
    sys.stdout.write(results.text)
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args)
    if args.sizes is None and args.config is None:
        cfg = replace(cfg, sizes=[10], instances=args.instances or 20)
    results = run_curvature_sweep(cfg)
    for p in emit(results, args.out or Path("results")):
        log.info("wrote %s", p)
    sys.stdout.write(results.text)
    return 0


def cmd_verify(args) -> int:
    inst, oracle, _ = read_instance(args.instance)
    oracle = _with_costs(inst, oracle, args)
    if isinstance(oracle, CombinedCostOracle):
        # algorithms run on the monotone shifted objective; bounds are checked on the raw one
        shifted = oracle.shifted()
        kappa = curvature(shifted).kappa
        reports = [solve(a, inst, shifted, args.seed or 0, kappa) for a in (args.algos or ["GT", "GM"])]
        verdicts = verify_certificates(inst, oracle, reports, kappa_shifted=kappa)
    else:
        kappa = curvature(oracle).kappa if oracle.monotone else None
        algos = args.algos or ["GT", "GM", "GreedyMatching2", "LinearMatching2"]
        reports = [solve(a, inst, oracle, args.seed or 0, kappa) for a in algos]
        verdicts = verify_certificates(inst, oracle, reports)
    rows = [asdict(v) for v in verdicts]
    stream = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(stream, fieldnames=["algorithm", "check", "value", "optimum", "bound", "passed"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            stream.close()
    return 0 if all(v.passed for v in verdicts) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxtour", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write generated instance files")
    _common(p)
    p.add_argument("--instances", type=int)
    p.add_argument("--thickness", choices=["bernoulli", "uniform", "fixed"])
    p.add_argument("--directed", action="store_const", const=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run algorithms on an instance file")
    p.add_argument("instance", type=Path)
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="algorithm comparison on random instances")
    _common(p)
    p.add_argument("--instances", type=int)
    p.add_argument("--thickness", choices=["bernoulli", "uniform", "fixed"])
    p.add_argument("--timings", action="store_true", help="also write wall times (not reproducible)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="curvature sweep over uniform edge thickness")
    _common(p)
    p.add_argument("--instances", type=int)
    p.add_argument("--thickness-grid", type=lambda s: [float(x) for x in s.split(",")], dest="thickness_grid")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check approximation certificates by brute force")
    p.add_argument("instance", type=Path)
    _common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
