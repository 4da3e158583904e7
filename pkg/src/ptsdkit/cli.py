"""Command-line interface: run | compare | tune | generate.

All outputs are files under --out; there is no interactive mode. Exit codes:
0 success, 2 configuration error, 3 data error, 4 training divergence.
"""

from __future__ import annotations

import argparse
import sys

from .config import config_from_dict, load_config
from .errors import ConfigError, DataError, TrainingDivergence
from .experiment import (compare_experiment, generate_experiment,
                         run_experiment, tune_experiment)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptsdkit",
        description="Batch tabular-classification experiments: preprocessing, "
                    "from-scratch learners, soft-voting ensembles, reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON file")
    common.add_argument("--data", help="dataset CSV path (overrides config)")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    common.add_argument("--ensemble", choices=["ensemble3", "ensemble6"],
                        help="ensemble preset (overrides config)")
    common.add_argument("--averaging", choices=["macro", "weighted"],
                        help="averaging mode for precision/recall/F1")

    sub.add_parser("run", parents=[common],
                   help="run one experiment and write report artifacts")
    sub.add_parser("compare", parents=[common],
                   help="train each configured model on the same split")
    sub.add_parser("tune", parents=[common],
                   help="random-search MLP hyperparameters")
    gen = sub.add_parser("generate", parents=[common],
                         help="write the configured synthetic dataset as CSV")
    gen.add_argument("--csv", help="output CSV path (default <out>/synthetic.csv)")
    return parser


def _config_from_args(args) -> "ExperimentConfig":
    overrides = {"data": args.data, "out": args.out, "seed": args.seed,
                 "ensemble": args.ensemble, "averaging": args.averaging}
    if args.config:
        return load_config(args.config, overrides)
    return config_from_dict({}, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "run":
            doc = run_experiment(cfg)
            primary = doc["models"][doc["primary"]]
            print(f"run complete: accuracy {primary['accuracy']:.4f} "
                  f"on {doc['split']['n_test']} test rows -> {cfg.out_dir}/report.json")
        elif args.command == "compare":
            doc = compare_experiment(cfg)
            print(f"compared {len(doc['models'])} models -> {cfg.out_dir}/comparison.csv")
        elif args.command == "tune":
            doc = tune_experiment(cfg)
            print(f"tuned over {doc['n_trials']} trials; best val accuracy "
                  f"{doc['best_val_accuracy']} -> {cfg.out_dir}/best_config.json")
        elif args.command == "generate":
            out_csv = args.csv or f"{cfg.out_dir}/synthetic.csv"
            sidecar = generate_experiment(cfg, out_csv)
            print(f"generated {sidecar['n_rows']} rows "
                  f"(bayes accuracy {sidecar['bayes_accuracy']}) -> {out_csv}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingDivergence as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
