"""Command-line front end for the experiment runner.

Usage: risnet run <config.json> [--seed N] [--trials N] [--out PATH]
                                [--format csv|json] [--experiment NAME]

Flags override the corresponding config fields. Exits 0 on success, 2 on a
configuration problem, 3 on a numerical failure, 1 otherwise.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, emit, run
from .network import IllConditionedError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="risnet",
        description="Monte Carlo experiments for reconfigurable reflecting surfaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runner = sub.add_parser("run", help="run an experiment from a JSON config file")
    runner.add_argument("config", help="path to the JSON experiment config")
    runner.add_argument("--seed", type=int, help="override the base seed")
    runner.add_argument("--trials", type=int, help="override the trial count")
    runner.add_argument("--out", help="override the output path")
    runner.add_argument("--format", choices=("csv", "json"), dest="fmt",
                        help="output format (default from the output extension)")
    runner.add_argument("--experiment", choices=EXPERIMENTS,
                        help="override the experiment name")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_file(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.experiment is not None:
            overrides["experiment"] = args.experiment
        if args.out is not None:
            overrides["output_path"] = args.out
        if overrides:
            cfg = replace(cfg, **overrides)
        table = run(cfg)
        out = cfg.output_path or f"{cfg.experiment}.csv"
        fmt = args.fmt or ("json" if str(out).endswith(".json") else "csv")
        emit(table, out, fmt)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IllConditionedError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(table.rows)} rows to {out} "
          f"(config_hash={table.config_hash}, seed={table.seed})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
