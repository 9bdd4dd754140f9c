"""Command-line entry point.

Verbs: ``run``, ``sweep-bags``, ``variance``, ``imbalance``, ``sweep-hyper``.
All accept ``--config`` (flat key = value file) plus ``--set key=value``
overrides; ``--seed``, ``--reps``, ``--model`` and ``--out`` are shorthand
for the matching keys.  Exit codes: 0 success, 1 config error, 2 runtime
error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .experiments import (
    ConfigError,
    imbalance_study,
    parse_config,
    run_experiment,
    sweep_bag_count,
    sweep_hyper,
    variance_protocol,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; bad usage is a config problem here
    def error(self, message):
        raise ConfigError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="override the seed")
    parser.add_argument("--reps", type=int, help="override the repetition count")
    parser.add_argument("--model", help="override the model list (comma separated or 'all')")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override any config key (repeatable; wins over the file)",
    )
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    parser.add_argument("-q", "--quiet", action="store_true", help="suppress progress logging")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evobagging", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="repeated train/test runs of the configured models")
    _add_common(run)

    sweep = sub.add_parser("sweep-bags", help="re-run the models across a range of bag counts")
    _add_common(sweep)
    sweep.add_argument("--from", dest="sweep_from", type=int, help="first bag count")
    sweep.add_argument("--to", dest="sweep_to", type=int, help="last bag count")
    sweep.add_argument("--step", dest="sweep_step", type=int, help="bag count step (default 10)")

    var = sub.add_parser("variance", help="across-training-set diversity of refitted ensembles")
    _add_common(var)
    var.add_argument("--runs", type=int, help="number of bootstrapped training sets")

    imb = sub.add_parser("imbalance", help="undersampling study on a binary dataset")
    _add_common(imb)
    imb.add_argument("--keep", help="comma-separated majority keep fractions")

    hyp = sub.add_parser("sweep-hyper", help="cross-validated grid search of the evolution settings")
    _add_common(hyp)

    return parser


def _collect_overrides(args: argparse.Namespace) -> list[str]:
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.reps is not None:
        overrides.append(f"repetitions={args.reps}")
    if args.model is not None:
        overrides.append(f"model={args.model}")
    if args.out is not None:
        overrides.append(f"out_dir={args.out}")
    if args.no_plots:
        overrides.append("plots=false")
    for name in ("sweep_from", "sweep_to", "sweep_step"):
        if getattr(args, name, None) is not None:
            overrides.append(f"{name}={getattr(args, name)}")
    if getattr(args, "runs", None) is not None:
        overrides.append(f"variance_runs={args.runs}")
    if getattr(args, "keep", None) is not None:
        overrides.append(f"imbalance_keeps={args.keep}")
    return overrides


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.WARNING if args.quiet else logging.INFO,
            format="%(message)s",
        )
        cfg = parse_config(args.config, _collect_overrides(args))
        if args.verb == "run":
            result = run_experiment(cfg)
        elif args.verb == "sweep-bags":
            result = sweep_bag_count(cfg)
        elif args.verb == "variance":
            result = variance_protocol(cfg)
        elif args.verb == "imbalance":
            result = imbalance_study(cfg)
        else:
            result = sweep_hyper(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for name, path in sorted(result.files.items()):
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
