"""Command-line driver.

Subcommands:
  run <config> [--out DIR] [--seed N] [--algos LIST]   run an experiment
  validate <config>                                    check a config file
  complexity <config>                                  print structure costs

Exit codes: 0 ok, 1 configuration error, 2 training divergence.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from dpdlab.config import load_config, validate_config
from dpdlab.errors import InvalidConfigError, InvalidSchemeError
from dpdlab.runner import complexity_table, run_experiment


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dpdlab",
        description="Train and score shared-coefficient predistorters for a "
        "subarray of Saleh-model power amplifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment and write artifacts")
    p_run.add_argument("config", help="experiment config file (INI)")
    p_run.add_argument("--out", help="output directory (overrides the config)")
    p_run.add_argument("--seed", type=int, help="waveform seed override")
    p_run.add_argument("--algos", help="comma-separated algorithm subset")

    p_val = sub.add_parser("validate", help="list config violations, run nothing")
    p_val.add_argument("config")

    p_cx = sub.add_parser("complexity", help="print multiplier/adder/RF-chain table")
    p_cx.add_argument("config")

    args = parser.parse_args(argv)

    if args.command == "validate":
        report = validate_config(args.config)
        for line in report:
            print(line)
        if not report:
            print("ok")
        return 1 if report else 0

    try:
        config = load_config(args.config)
    except InvalidConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    if args.command == "complexity":
        try:
            print(complexity_table(config))
        except InvalidSchemeError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return 1
        return 0

    algorithms = None
    if args.algos:
        algorithms = tuple(a.strip() for a in args.algos.split(",") if a.strip())
    try:
        result = run_experiment(config, out_dir=args.out, seed=args.seed, algorithms=algorithms)
    except (InvalidConfigError, InvalidSchemeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    for algo, evms in result.summary.items():
        evm_list = " ".join(f"{e:6.2f}" for e in evms)
        print(f"{algo:14s} EVM% per PA: {evm_list}  mean {np.mean(evms):6.2f}")
    if result.diverged:
        print(f"diverged: {', '.join(result.diverged)}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
