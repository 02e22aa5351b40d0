"""Command-line entry point: ``thirring run|compare|list-scenarios|plot``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .errors import ConfigurationError, ValidationError
from .scenarios import BUILTIN_SCENARIOS, SLICE_TIMES, resolve, validate


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thirring", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a builtin scenario or a YAML config")
    run.add_argument("target", help="scenario name or config path")
    run.add_argument("--out", help="output directory (default: $THIRRING_OUTPUT/<name>)")
    run.add_argument("--seed", type=int)
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--method", choices=["taylor2", "dense", "givens-circuit", "oracle"])
    run.add_argument("--no-plots", action="store_true")

    cmp_ = sub.add_parser("compare", help="diff the CSV outputs of two runs")
    cmp_.add_argument("dir_a")
    cmp_.add_argument("dir_b")
    cmp_.add_argument("--tol", type=float, default=1e-8)

    sub.add_parser("list-scenarios", help="show builtin scenarios")

    plot = sub.add_parser("plot", help="render an SVG from a run CSV")
    plot.add_argument("csv")
    plot.add_argument("--slices", action="store_true", help="add line plots at t = 0, 6, ..., 24")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "list-scenarios":
            for name, cfg in sorted(BUILTIN_SCENARIOS.items()):
                print(f"{name:<14} N={cfg.n_sites:<4} {cfg.method:<15} {cfg.description}")
            return 0
        if args.command == "run":
            from .runner import run_scenario

            cfg = resolve(args.target)
            changes = {}
            if args.seed is not None:
                changes["seed"] = args.seed
            if args.method is not None:
                changes["method"] = args.method
            if args.no_plots:
                changes["plots"] = False
            cfg = replace(cfg, **changes)
            validate(cfg)
            result = run_scenario(cfg, out_dir=args.out, threads=args.threads)
            for f in result.files:
                print(f)
            print(f"wrote {len(result.files)} files to {result.directory}")
            return 0
        if args.command == "compare":
            from .runner import compare_runs

            report = compare_runs(args.dir_a, args.dir_b, args.tol)
            print(report.to_text())
            return 0 if report.passed else 1
        if args.command == "plot":
            from .plotting import plot_csv

            files = plot_csv(args.csv, SLICE_TIMES if args.slices else None)
            for f in files:
                print(f)
            return 0
    except (ConfigurationError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
