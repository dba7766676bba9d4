"""Command line entry point.

    laxrom run CONFIG        full experiment: tables, error series, snapshots
    laxrom sweep CONFIG      repeat the experiment over a chi grid
    laxrom scsa CONFIG       static signal representation study
    laxrom frobenius CONFIG  residual-norm comparison against a reference N_M

All subcommands share --out (override the configured output directory),
--threads (parallel mode counts) and --verbose.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    compare_frobenius,
    load_config,
    run_chi_sweep,
    run_experiment,
    run_scsa,
)


def _add_common(sub):
    sub.add_argument("config", help="experiment configuration file (INI)")
    sub.add_argument("--out", help="output directory (overrides the config)")
    sub.add_argument("--threads", type=int, default=1,
                     help="worker threads across mode counts (default 1)")
    sub.add_argument("--verbose", action="store_true", help="progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laxrom",
        description="Reduced-order modeling on a moving Schrodinger eigenbasis",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("run", "run one experiment and write its error tables"),
        ("sweep", "run the experiment for every chi in [sweep] chi_grid"),
        ("scsa", "signal representation chi sweep (static)"),
        ("frobenius", "compare residual norms against nm_ref"),
    ]:
        _add_common(subs.add_parser(name, help=text, description=text))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out is not None:
        cfg.out_dir = args.out
    if cfg.out_dir is None:
        cfg.out_dir = "out"

    try:
        if args.command == "run":
            report = run_experiment(cfg, verbose=args.verbose, threads=args.threads)
            for nm, msg in sorted(report.errors.items()):
                print(f"error: N_M={nm}: {msg}", file=sys.stderr)
            return 1 if report.errors else 0
        if args.command == "sweep":
            reports = run_chi_sweep(cfg, verbose=args.verbose, threads=args.threads)
            bad = {
                (chi, nm): msg
                for chi, rep in reports.items()
                for nm, msg in rep.errors.items()
            }
            for (chi, nm), msg in sorted(bad.items()):
                print(f"error: chi={chi:g} N_M={nm}: {msg}", file=sys.stderr)
            return 1 if bad else 0
        if args.command == "scsa":
            run_scsa(cfg, verbose=args.verbose)
            return 0
        if args.command == "frobenius":
            compare_frobenius(cfg, verbose=args.verbose)
            return 0
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
