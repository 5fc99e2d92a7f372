"""Command line entry point.

    walshprod <command> --config <path> [--out <dir>] [--seed <u64>]
              [--threads <k>] [--exact|--mc] [--no-plots]

Outputs: <out>/<command>.csv (byte-stable), <out>/summary.json, and
<out>/<command>.png unless --no-plots.  Exit codes: 0 all assertions pass,
2 assertion failure, 3 config error, 4 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .config import config_hash, load_config
from .errors import BudgetExceededError, ConfigError
from .experiments import COMMANDS
from .hypercube import RNG_ALGORITHM
from .matrices import SEED_MIXER
from .reporting import write_csv, write_summary

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_CONFIG = 3
EXIT_BUDGET = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walshprod",
        description="Expected products of random Fourier-Walsh matrices: "
        "exact identities, scaling sweeps, and counting bounds.",
    )
    parser.add_argument("--version", action="version", version=f"walshprod {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="<command>")
    docs = {
        "verify-identity": "exact second-moment identity on disjoint family pairs",
        "scaling-sweep": "operator norm of E[M] across a dimension schedule",
        "counting-bounds": "binary-matrix counts against closed-form bounds",
        "mc-vs-exact": "Monte Carlo estimator against the exact engine",
        "weighted-sums": "weighted monomial sums against their degree scales",
    }
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=docs[name])
        p.add_argument("--config", required=True, help="path to the JSON config file")
        p.add_argument("--out", default=None, help="output directory (default results/<command>)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads for MC trials")
        engine = p.add_mutually_exclusive_group()
        engine.add_argument(
            "--exact", action="store_true", help="force the exact engine"
        )
        engine.add_argument(
            "--mc", action="store_true", help="force the Monte Carlo engine"
        )
        p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    return parser


def run(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg = dict(cfg, seed=args.seed)
    engine = "exact" if args.exact else "mc" if args.mc else None
    out_dir = Path(args.out) if args.out else Path("results") / args.command
    started = time.perf_counter()
    try:
        result = COMMANDS[args.command](cfg, threads=max(1, args.threads), engine=engine)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    elapsed = time.perf_counter() - started

    csv_path = out_dir / f"{result.command}.csv"
    write_csv(csv_path, result.header, result.rows)
    figures: list[str] = []
    if not args.no_plots:
        from .plots import render_figures

        figures = render_figures(result, out_dir)
    summary = {
        "command": result.command,
        "config_hash": config_hash(cfg),
        "seed": cfg.get("seed"),
        "rng_algorithm": RNG_ALGORITHM,
        "seed_mixer": SEED_MIXER,
        "assertions": [asdict(a) for a in result.assertions],
        "all_passed": result.ok,
        "rows_written": len(result.rows),
        "runtime_seconds": elapsed,
        "outputs": {"csv": str(csv_path), "figures": figures},
        "meta": result.meta,
    }
    write_summary(out_dir / "summary.json", summary)
    for a in result.assertions:
        tag = "SKIP" if a.skipped else ("PASS" if a.passed else "FAIL")
        print(f"[{tag}] {a.name}" + (f": {a.detail}" if a.detail else ""))
    print(f"wrote {csv_path} ({len(result.rows)} rows) in {elapsed:.2f}s")
    return EXIT_OK if result.ok else EXIT_ASSERTION


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
