"""Command-line front end: score, verify and prepare subcommands."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .config import RunConfig, load_config_file, merge_config
from .data import IngestionOptions, empirical_model, read_csv, user_model
from .engine import run_analysis
from .errors import (CISearchFailure, DomainError, EmptyDatasetError,
                     IngestionError, SonoError, TableExplosion)
from .plots import score_depth_scatter_svg
from .prepare import RECIPES, prepare_dataset
from .verify import run_verify

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_INGESTION = 2
EXIT_THRESHOLD = 3
EXIT_OUTPUT = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sono",
        description="Score nominal outlyingness of categorical data.")
    parser.add_argument("--version", action="version", version=f"sono {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("score", help="score a CSV of nominal variables")
    ps.add_argument("--input", help="input CSV path")
    ps.add_argument("--config", help="flat JSON config file (or a previous run.json)")
    ps.add_argument("--mode", choices=("infrequent", "frequent"))
    ps.add_argument("--alpha", type=float)
    ps.add_argument("--r", type=float, dest="r")
    ps.add_argument("--no-prune", action="store_const", const=False, dest="prune",
                    default=None, help="flag every itemset meeting its threshold")
    ps.add_argument("--max-len", type=int, dest="max_len",
                    help="cap the search depth, skipping the depth rule")
    ps.add_argument("--probs", help="JSON file of per-variable level probabilities")
    ps.add_argument("--out", help="output directory")
    ps.add_argument("--format", help="comma list from csv,json,svg")
    ps.add_argument("--drop-cols", dest="drop_cols", help="comma list of columns to drop")
    ps.add_argument("--missing", choices=("drop", "level"))
    ps.add_argument("--threads", type=int)
    ps.add_argument("--oracle-nu", action="store_const", const=True, dest="oracle_nu",
                    default=None, help="use exact-convolution coverage everywhere")
    ps.add_argument("--delimiter")
    ps.add_argument("--no-header", action="store_const", const=False, dest="header",
                    default=None)
    ps.add_argument("--missing-markers", dest="missing_markers",
                    help="comma list of missing-value markers")
    ps.add_argument("--level-order", dest="level_order",
                    choices=("first", "lexicographic"))
    ps.add_argument("--maxlen-rule", dest="maxlen_rule",
                    choices=("any-cell", "all-cells"))
    ps.add_argument("--max-cells", dest="max_cells", type=float)

    pv = sub.add_parser("verify", help="run the reference-oracle audit suites")
    pv.add_argument("--seed", type=int, default=20240901)
    pv.add_argument("--datasets", type=int, default=12,
                    help="random datasets for the walker suite")
    pv.add_argument("--p-max", type=int, default=60,
                    help="largest p for the proposition sweep")
    pv.add_argument("--suite", action="append",
                    choices=("nu", "exact-nu", "coverage", "propositions", "walker"),
                    help="run only the named suites (repeatable)")

    pp = sub.add_parser("prepare", help="apply a documented UCI cleaning recipe")
    pp.add_argument("dataset", nargs="?", help=f"one of: {', '.join(sorted(RECIPES))}")
    pp.add_argument("--raw", help="directory holding the raw UCI files")
    pp.add_argument("--out", help="cleaned CSV output path")
    pp.add_argument("--list", action="store_true", help="list recipes and URLs")
    return parser


def _cli_overrides(args: argparse.Namespace) -> dict:
    keys = ("input", "mode", "alpha", "r", "prune", "max_len", "probs", "out",
            "format", "drop_cols", "missing", "threads", "oracle_nu", "delimiter",
            "header", "missing_markers", "level_order", "maxlen_rule", "max_cells")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _write_scores_csv(path: str, scores, depths) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "score", "depth"])
        for i, (s, d) in enumerate(zip(scores, depths), start=1):
            writer.writerow([i, repr(float(s)), repr(float(d))])


def _write_contributions_csv(path: str, contributions, names) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", *names])
        for i, row in enumerate(contributions, start=1):
            writer.writerow([i, *(repr(float(v)) for v in row)])


def cmd_score(args: argparse.Namespace) -> int:
    file_values = load_config_file(args.config) if args.config else None
    cfg = merge_config(RunConfig(), file_values, _cli_overrides(args))
    if not cfg.input:
        raise IngestionError("no --input file given")
    opts = IngestionOptions(
        delimiter=cfg.delimiter, header=cfg.header,
        missing_markers=tuple(cfg.missing_markers), missing_policy=cfg.missing,
        level_order=cfg.level_order, drop_cols=tuple(cfg.drop_cols))
    ds = read_csv(cfg.input, opts)
    if ds.dropped_rows:
        print(f"dropped {ds.dropped_rows} rows with missing values", file=sys.stderr)
    if cfg.probs:
        try:
            with open(cfg.probs) as fh:
                doc = json.load(fh)
        except (OSError, ValueError) as exc:
            raise IngestionError(f"cannot read probability file: {exc}") from exc
        mapping = {
            var: (dict((k, v) for entry in spec for k, v in entry.items())
                  if isinstance(spec, list) else spec)
            for var, spec in doc.items()
        }
        if mapping:
            try:
                ds, model = user_model(ds, mapping)
            except DomainError as exc:
                raise IngestionError(f"bad probability file: {exc}") from exc
            print(f"probabilities for {sorted(mapping)} taken from {cfg.probs}; "
                  "other variables empirical", file=sys.stderr)
        else:
            model = empirical_model(ds)
            print("empty probability file; using the empirical model", file=sys.stderr)
    else:
        model = empirical_model(ds)

    report, info, _flags = run_analysis(ds, model, cfg)
    print(f"n={ds.n} p={ds.p} maxlen={info.maxlen} (rule {info.maxlen_rule}) "
          f"nonzero scores {int((report.scores > 0).sum())}/{ds.n} "
          f"in {info.runtime_s:.1f}s", file=sys.stderr)

    try:
        os.makedirs(cfg.out, exist_ok=True)
        if "csv" in cfg.format:
            _write_scores_csv(os.path.join(cfg.out, "scores.csv"),
                              report.scores, report.depths)
            _write_contributions_csv(os.path.join(cfg.out, "contributions.csv"),
                                     report.contributions, ds.variable_names)
        if "json" in cfg.format:
            run_doc = {
                "config": cfg.to_flat_dict(),
                "dataset": {
                    "n": ds.n, "p": ds.p,
                    "variables": list(ds.variable_names),
                    "level_counts": list(ds.level_counts),
                    "dropped_rows": ds.dropped_rows,
                },
                "maxlen": {
                    "value": info.maxlen,
                    "rule": info.maxlen_rule,
                    "violating_subset": list(info.violating_subset)
                    if info.violating_subset is not None else None,
                },
                "thresholds": {
                    "c_by_size": {str(k): v for k, v in info.c_by_size.items()},
                },
                "instrumentation": {
                    "subsets_materialized": info.stats.subsets_materialized,
                    "subsets_skipped": info.stats.subsets_skipped,
                    "cells_tested": info.stats.cells_tested,
                    "cells_pruned": info.stats.cells_pruned,
                    "cells_flagged": info.stats.cells_flagged,
                    "deepest_level_tested": info.stats.deepest_level_tested,
                },
                "diagnostics": {"saturated_tables": info.saturated_tables},
                "results": {
                    "nonzero_scores": int((report.scores > 0).sum()),
                    "max_score": float(report.scores.max()),
                    "runtime_s": info.runtime_s,
                },
            }
            with open(os.path.join(cfg.out, "run.json"), "w") as fh:
                json.dump(run_doc, fh, indent=2)
        if "svg" in cfg.format:
            score_depth_scatter_svg(
                report.depths, report.scores,
                os.path.join(cfg.out, "score_vs_depth.svg"))
    except OSError as exc:
        print(f"output failure: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    status, text = run_verify(n_datasets=args.datasets, seed=args.seed,
                              p_max=args.p_max,
                              suites=tuple(args.suite) if args.suite else None)
    print(text)
    return status


def cmd_prepare(args: argparse.Namespace) -> int:
    if args.list or not args.dataset:
        for name in sorted(RECIPES):
            recipe = RECIPES[name]
            shape = recipe.expected_shape
            print(f"{name}: files {', '.join(recipe.files)} -> "
                  f"{shape[0]}x{shape[1]}  ({recipe.url})")
        return EXIT_OK
    if not args.raw or not args.out:
        raise IngestionError("prepare needs --raw DIR and --out FILE")
    shape = prepare_dataset(args.dataset, args.raw, args.out)
    print(f"{args.dataset}: wrote {shape[0]}x{shape[1]} to {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "score":
            return cmd_score(args)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_prepare(args)
    except (IngestionError, EmptyDatasetError, FileNotFoundError) as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGESTION
    except (CISearchFailure, TableExplosion) as exc:
        print(f"threshold error: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    except (DomainError, SonoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
