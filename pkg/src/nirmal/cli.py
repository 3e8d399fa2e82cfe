"""Command-line entry point: ``nirmal-bench run ...`` and ``nirmal-bench compare --config FILE``.

Exit status is 0 on success (a diverged run still counts as a clean exit),
2 for configuration errors and 3 for missing or unreadable files.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core import OPTIMIZER_NAMES
from .data import IdxFormatError
from .harness import (
    TASKS,
    ConfigError,
    RunConfig,
    compare,
    format_table,
    load_compare_config,
    run,
    table_csv,
)

EXIT_CONFIG = 2
EXIT_IO = 3


def _hp_pair(text):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"hyperparameter {key} needs a number, got {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nirmal-bench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch metrics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one optimizer on one task")
    p.add_argument("--optimizer", required=True, choices=OPTIMIZER_NAMES)
    p.add_argument("--task", default="logreg", choices=TASKS)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch", type=int, default=64, help="minibatch size (model tasks)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--data-dir", help="directory holding the uncompressed MNIST IDX files")
    p.add_argument("--subset", type=int, default=1000,
                   help="training samples (class balanced); test uses half; 0 = full files")
    p.add_argument("--weight-decay", type=float, default=0.0)
    p.add_argument("--dim", type=int, default=10, help="dimension of analytic tasks")
    p.add_argument("--condition", type=float, default=10.0, help="quadratic condition number")
    p.add_argument("--steps-per-epoch", type=int, default=200, help="analytic tasks only")
    p.add_argument("--hidden", type=int, default=64, help="MLP hidden width")
    p.add_argument("--hp", type=_hp_pair, action="append", default=[], metavar="KEY=VALUE",
                   help="hyperparameter override, e.g. --hp eta=0.01 (repeatable)")
    p.add_argument("--out", help="directory for trajectory.csv, epochs.csv and record.json")

    c = sub.add_parser("compare", help="run a list of configs and print a comparison table")
    c.add_argument("--config", required=True, help="JSON file with the runs to compare")
    c.add_argument("--out", help="write the comparison table as CSV here")
    c.add_argument("--workers", type=int, default=1, help="runs to execute concurrently")
    return parser


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        optimizer=args.optimizer,
        task=args.task,
        hyperparams=dict(args.hp),
        epochs=args.epochs,
        batch_size=args.batch,
        seed=args.seed,
        weight_decay=args.weight_decay,
        data_dir=args.data_dir,
        subset=args.subset or None,
        dim=args.dim,
        condition=args.condition,
        steps_per_epoch=args.steps_per_epoch,
        hidden=args.hidden,
        out=args.out,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            record = run(_config_from_args(args))
            summary = {"status": record.status, "steps": len(record.steps), "final": record.final}
            if record.diverged:
                summary["diverged_at_step"] = record.diverged_at_step
            print(json.dumps(summary, indent=2))
        else:
            rows, records = compare(load_compare_config(args.config), workers=args.workers)
            print(format_table(rows))
            for rec in records:
                if rec.diverged:
                    print(f"{rec.config['optimizer']}: diverged at step {rec.diverged_at_step}", file=sys.stderr)
            if args.out:
                Path(args.out).write_text(table_csv(rows))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, IdxFormatError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
