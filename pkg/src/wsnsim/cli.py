"""Command-line entry point: ``wsnsim run|experiment|oracle``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments, oracle
from .config import ConfigError, Settings, parse_config
from .engine import run_simulation
from .protocols import PROTOCOLS, canonical_name

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNWRITABLE = 0, 1, 2, 3


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsnsim", description="Cluster-based wireless sensor network simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one protocol on one seeded topology")
    run.add_argument("--config", type=Path, help="key = value config file (defaults when omitted)")
    run.add_argument("--protocol", required=True, help=f"one of {', '.join(PROTOCOLS)}")
    run.add_argument("--seed", type=_u64, default=1)
    run.add_argument("--out", type=Path, help="write the per-round CSV and manifest here")

    exp = sub.add_parser(
        "experiment",
        help="run a named sweep",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Experiments and the figure each one reproduces:\n" + experiments.describe(),
    )
    exp.add_argument("name", help="experiment name (see above)")
    exp.add_argument("--config", type=Path)
    exp.add_argument("--seeds", type=_positive, help="number of consecutive seeds from base_seed")
    exp.add_argument("--out", type=Path, default=Path("results"))
    exp.add_argument("--protocols", help="comma-separated subset of protocols")
    exp.add_argument("--grid", help="comma-separated override of the sweep values")

    orc = sub.add_parser("oracle", help="check fast paths against naive reference implementations")
    orc.add_argument("target", choices=("knn", "rankorder"))
    orc.add_argument("--n", type=int, default=0, help="points per instance (0: random sizes)")
    orc.add_argument("--seed", type=_u64, default=1)
    orc.add_argument("--instances", type=_positive)
    return parser


def _settings(path) -> Settings:
    return parse_config(path) if path else Settings()


def _grid_values(text: str, variable: str | None):
    if variable is None:
        raise experiments.UsageError("this experiment has no sweep variable")
    kind = int if variable in ("n_nodes", "msg_bits") else float
    try:
        return tuple(kind(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise experiments.UsageError(f"bad grid value list {text!r}") from None


def cmd_run(args) -> int:
    settings = _settings(args.config)
    result = run_simulation(canonical_name(args.protocol), settings.sim, args.seed)
    info = {k: result.manifest[k] for k in ("protocol", "seed", "fnd_round", "lnd_round", "truncated", "rounds")}
    if args.out:
        try:
            args.out.mkdir(parents=True, exist_ok=True)
            stem = f"{result.protocol}_seed{args.seed}"
            (args.out / f"{stem}.csv").write_text(result.to_csv())
            (args.out / f"{stem}.json").write_text(json.dumps(result.manifest, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            print(f"wsnsim: cannot write to {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_UNWRITABLE
        info["output"] = str(args.out / f"{stem}.csv")
    print(json.dumps(info))
    return EXIT_OK


def cmd_experiment(args) -> int:
    settings = _settings(args.config)
    if args.name not in experiments.EXPERIMENTS:
        raise experiments.UsageError(f"unknown experiment {args.name!r}; choose from {', '.join(experiments.EXPERIMENTS)}")
    protocols = [p.strip() for p in args.protocols.split(",")] if args.protocols else None
    variable = experiments.EXPERIMENTS[args.name][0]
    grid = _grid_values(args.grid, variable) if args.grid else None
    spec = experiments.default_spec(args.name, settings, args.seeds, protocols, grid, args.out)
    if not experiments.writable(spec.out_dir):
        print(f"wsnsim: output directory {spec.out_dir} is not writable", file=sys.stderr)
        return EXIT_UNWRITABLE
    try:
        summary = experiments.run_experiment(spec, settings)
    except PermissionError as exc:
        print(f"wsnsim: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    for row in summary.rows:
        gv = "" if row["grid_value"] is None else f" @ {row['grid_value']}"
        print(f"{row['protocol']}{gv}: FND {row['fnd_mean']:.1f} ± {row['fnd_std']:.1f}, "
              f"LND {row['lnd_mean']:.1f} ± {row['lnd_std']:.1f} ({row['seeds']} seeds)")
    print(f"outputs in {summary.directory}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.target == "knn":
        if args.n and args.n < 7:
            raise experiments.UsageError("--n must be at least 7 for the kNN checks")
        problems = oracle.check_knn(args.n, args.seed, args.instances or 50)
    else:
        if args.n and args.n < 3:
            raise experiments.UsageError("--n must be at least 3 for the rank-order checks")
        problems = oracle.check_rankorder(args.n, args.seed, args.instances or 10)
    for p in problems:
        print(p)
    print(f"{args.target}: {'OK' if not problems else f'{len(problems)} mismatches'}")
    return EXIT_OK if not problems else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"run": cmd_run, "experiment": cmd_experiment, "oracle": cmd_oracle}[args.command]
    try:
        return handler(args)
    except (ConfigError, experiments.UsageError) as exc:
        print(f"wsnsim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # unknown protocol names and similar argument mistakes
        print(f"wsnsim: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
