"""Command-line interface.

Subcommands:

* ``run``              run a suite from a config (or a previous manifest)
* ``metrics``          recompute the summary from a run directory's CSVs
* ``oracle``           build or check the benchmark range cache
* ``list-benchmarks``  show the built-in families
* ``report``           render figures from a run directory
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .benchmarks import (
    FAMILIES,
    ORACLE_POLISH,
    ORACLE_SAMPLES,
    ORACLE_SEED,
    build_range_cache,
    load_range_cache,
    save_range_cache,
    _data_path,
)
from .problems import ConfigError, load_config
from .suite import load_manifest, recompute_summary, run_suite, write_summary


def _print_summary(rows) -> None:
    header = f"{'method':<12} {'reps':>5} {'fail':>5} {'auc_mean':>10} {'auc_std':>10} {'regret_mean':>12} {'regret_std':>11}"
    print(header)
    for r in rows:
        print(
            f"{r['method']:<12} {r['replicates']:>5} {r['failures']:>5} "
            f"{r['auc_mean']:>10.4f} {r['auc_std']:>10.4f} "
            f"{r['regret_mean']:>12.4f} {r['regret_std']:>11.4f}"
        )


def _cmd_run(args) -> int:
    if args.manifest:
        config = load_manifest(args.manifest)
    elif args.config:
        config = load_config(args.config)
    else:
        print("run: give a config file or --manifest", file=sys.stderr)
        return 2
    result = run_suite(config, args.out, jobs=args.jobs)
    _print_summary(result.summary_rows)
    if result.failures:
        print(f"{len(result.failures)} replicate(s) failed; see failures.csv",
              file=sys.stderr)
    if args.figures:
        from .report import render_report

        for path in render_report(args.out):
            print(f"wrote {path}")
    print(f"output in {Path(args.out).resolve()}")
    return 0


def _cmd_metrics(args) -> int:
    rows = recompute_summary(args.out_dir)
    write_summary(args.out_dir, rows)
    _print_summary(rows)
    return 0


def _cmd_oracle(args) -> int:
    cache = build_range_cache(samples=args.samples, polish=args.polish, seed=args.seed)
    if args.check:
        reference = load_range_cache(args.out)
        mismatches = []
        if (reference["seed"], reference["samples"], reference["polish"]) != (
            args.seed, args.samples, args.polish,
        ):
            mismatches.append("oracle parameters differ from the cached file")
        for new, old in zip(cache["agents"], reference["agents"]):
            for key in ("family", "agent", "f_min", "f_max"):
                if new[key] != old[key]:
                    mismatches.append(
                        f"{new['family']} agent {new['agent']}: {key} "
                        f"{old[key]!r} -> {new[key]!r}"
                    )
        if mismatches:
            print("range cache is stale:", file=sys.stderr)
            for line in mismatches:
                print(f"  {line}", file=sys.stderr)
            return 1
        print("range cache matches a fresh oracle run")
        return 0
    target = save_range_cache(cache, args.out)
    flagged = [e for e in cache["agents"] if not e["within_tolerance"]]
    print(f"wrote {target} ({len(cache['agents'])} agents, "
          f"{len(flagged)} published-optimum discrepancies logged)")
    return 0


def _cmd_list(args) -> int:
    del args
    for name, fam in FAMILIES.items():
        shared = ",".join(str(j) for j in fam.shared_dims)
        print(f"{name}: {fam.n_agents} agents, {fam.dim}-D, shared dims [{shared}], "
              f"n_init {fam.n_init}")
        for i in range(fam.n_agents):
            print(f"  agent {i}: budget {fam.budgets[i]}, "
                  f"published optimum {fam.published_optima[i]}")
    return 0


def _cmd_report(args) -> int:
    from .report import render_report

    for path in render_report(args.out_dir, dpi=args.dpi):
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cobo",
        description="Collaborative Bayesian optimization suites",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a suite from a config file")
    p_run.add_argument("config", nargs="?", help="YAML experiment config")
    p_run.add_argument("--manifest", help="rerun from a previous manifest.json")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_run.add_argument("--figures", action="store_true",
                       help="also render report figures")
    p_run.set_defaults(func=_cmd_run)

    p_metrics = sub.add_parser(
        "metrics", help="recompute summary.csv from a run directory"
    )
    p_metrics.add_argument("out_dir")
    p_metrics.set_defaults(func=_cmd_metrics)

    p_oracle = sub.add_parser(
        "oracle", help="build or verify the benchmark range cache"
    )
    p_oracle.add_argument("--out", default=None,
                          help=f"cache file (default: {_data_path()})")
    p_oracle.add_argument("--samples", type=int, default=ORACLE_SAMPLES)
    p_oracle.add_argument("--polish", type=int, default=ORACLE_POLISH)
    p_oracle.add_argument("--seed", type=int, default=ORACLE_SEED)
    p_oracle.add_argument("--check", action="store_true",
                          help="compare a fresh oracle run against the cache")
    p_oracle.set_defaults(func=_cmd_oracle)

    p_list = sub.add_parser("list-benchmarks", help="show built-in families")
    p_list.set_defaults(func=_cmd_list)

    p_report = sub.add_parser("report", help="render figures from a run directory")
    p_report.add_argument("out_dir")
    p_report.add_argument("--dpi", type=int, default=150)
    p_report.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
