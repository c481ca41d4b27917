"""Command-line interface.

Subcommands:
  run                   run an experiment config, write CSV/JSON artifacts
  check-bounds          run and print the bound-verification table only
  compare-regularities  horizon sweep of V_T versus squared path length
  gen-env               generate an environment and save its sequence JSON

Exit codes: 0 success, 2 configuration error, 3 failed bound check under
--strict.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigInvalid, DynRegretError
from .harness import (
    OUT_DIR_ENV_VAR,
    compare_regularities,
    generate_environment,
    load_config,
    run_experiment,
    write_comparison_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BOUND_FAILURE = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("config", help="experiment config (.toml or .json)")
    parser.add_argument("--seed", type=int, default=None,
                        help="run a single seed instead of the configured list")
    parser.add_argument("--horizon", type=int, default=None,
                        help="override the configured horizon")
    parser.add_argument("--out-dir", default=None,
                        help=f"output root (default ${OUT_DIR_ENV_VAR} or ./out)")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="emit only one artifact kind (default: both)")
    parser.add_argument("--strict", action="store_true",
                        help="exit 3 if any admissible bound check fails")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynregret",
        description="Online learners for drifting losses with regret-bound verification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("run", help="run learners and write artifacts"))
    _add_common(sub.add_parser("check-bounds", help="run and verify bounds only"))

    cmp_parser = sub.add_parser("compare-regularities",
                                help="sweep V_T against the squared path length")
    cmp_parser.add_argument("config")
    cmp_parser.add_argument("--out-dir", default=None)
    cmp_parser.add_argument("-o", "--output", default=None,
                            help="write the sweep table to this CSV")

    gen_parser = sub.add_parser("gen-env", help="generate and save a sequence")
    gen_parser.add_argument("config")
    gen_parser.add_argument("-o", "--output", required=True)
    gen_parser.add_argument("--seed", type=int, default=None)
    gen_parser.add_argument("--horizon", type=int, default=None)
    return parser


def _apply_overrides(config, args):
    changes = {}
    if args.seed is not None:
        changes["seeds"] = (args.seed,)
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if not changes:
        return config
    from dataclasses import replace

    return replace(config, **changes)


def _print_summary(summary, verbose_runs: bool) -> None:
    for rec in summary.records:
        if verbose_runs:
            flags = " oracle=true" if rec.oracle else ""
            print(f"{rec.learner} seed={rec.seed}: regret={rec.final_regret:.6g} "
                  f"gradients={rec.gradient_queries}{flags} "
                  f"({rec.wall_time * 1e3:.1f} ms)")
        for report in rec.bounds:
            if not report.admissible:
                reason = report.details.get("reason", "preconditions not met")
                print(f"  {rec.learner} seed={rec.seed} {report.theorem_id}: "
                      f"[n/a] {reason}")
            else:
                status = "ok" if report.satisfied() else "FAIL"
                print(f"  {rec.learner} seed={rec.seed} {report.theorem_id}: "
                      f"[{status}] measured={report.measured_regret:.6g} "
                      f"bound={report.bound_value:.6g} slack={report.slack:.6g}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("run", "check-bounds"):
            config = _apply_overrides(load_config(args.config), args)
            bounds_only = args.command == "check-bounds"
            write_csv = not bounds_only and args.format in (None, "csv")
            write_json = not bounds_only and args.format in (None, "json")
            summary = run_experiment(config, out_dir=args.out_dir,
                                     write_csv=write_csv, write_json=write_json)
            _print_summary(summary, verbose_runs=not bounds_only)
            failed = summary.failed_checks()
            if failed:
                print(f"{len(failed)} bound check(s) FAILED")
                if args.strict:
                    return EXIT_BOUND_FAILURE
            elif config.bound_checks:
                print("all bound checks passed")
            return EXIT_OK

        if args.command == "compare-regularities":
            config = load_config(args.config)
            rows = compare_regularities(config)
            print("T,function_variation,exactness,squared_path_length")
            for row in rows:
                print(f"{row['T']},{row['function_variation']:.17g},"
                      f"{row['variation_exactness']},"
                      f"{row['squared_path_length']:.17g}")
            if args.output:
                write_comparison_csv(rows, args.output)
            return EXIT_OK

        generate_environment(args.config, args.output,
                             seed=args.seed, horizon=args.horizon)
        print(f"wrote {args.output}")
        return EXIT_OK
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DynRegretError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
