"""Command-line front end: run, report, histogram.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime or I/O
error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .config import ExperimentConfig, from_mapping, load_config, merged
from .errors import ConfigError, InvariantViolation, ParameterError
from .metrics import build_report, format_report
from .plotting import emit_histogram
from .runner import load_results, run_experiment, write_report_files

STRATEGY_CHOICES = ("0", "A", "b", "Ab", "all")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):  # noqa: D102 - argparse override
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    parser = _Parser(prog="fairsoc", description="Fairness-strategy society simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment and write logs")
    run.add_argument("--config", type=Path, help="JSON config file; defaults apply without it")
    run.add_argument("--strategy", choices=STRATEGY_CHOICES, help="restrict to one strategy")
    run.add_argument("--societies", type=int)
    run.add_argument("--generations", type=int)
    run.add_argument("--agents", type=int, dest="initial_population", metavar="N0",
                     help="founding population per society")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path, default=Path("fairsoc_out"))
    run.add_argument("--format", choices=("csv", "json"), dest="log_format")
    run.add_argument("--workers", type=int, help="0 means one per core")
    run.set_defaults(func=_cmd_run)

    report = sub.add_parser("report", help="rebuild the summary report from run logs")
    report.add_argument("--in", dest="run_dir", type=Path, required=True)
    report.set_defaults(func=_cmd_report)

    hist = sub.add_parser("histogram", help="overlay final-generation consumption histograms")
    hist.add_argument("--in", dest="run_dir", type=Path, required=True)
    hist.add_argument("--strategies", default="0,Ab",
                      help="comma-separated strategy tokens, e.g. 0,Ab")
    hist.add_argument("--generation", choices=("last",), default="last",
                      help="only the final generation is retained in the logs")
    hist.add_argument("--out", type=Path, help="output SVG path (default: <run dir>/histogram.svg)")
    hist.set_defaults(func=_cmd_histogram)
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {
        "societies": args.societies,
        "generations": args.generations,
        "initial_population": args.initial_population,
        "seed": args.seed,
        "log_format": args.log_format,
        "workers": args.workers,
    }
    if args.strategy is not None:
        overrides["strategies"] = (
            list(STRATEGY_CHOICES[:-1]) if args.strategy == "all" else [args.strategy]
        )
    config = merged(config, overrides)
    outcome = run_experiment(config, args.out)
    print(format_report(outcome.report))
    print(f"\nwrote {len(outcome.files)} files under {outcome.out_dir}")
    return 0


def _cmd_report(args) -> int:
    results = load_results(args.run_dir)
    seed, digest, log_format = _run_metadata(args.run_dir)
    report = build_report(results, metadata={"seed": str(seed), "config_digest": digest})
    print(format_report(report))
    write_report_files(Path(args.run_dir), report, log_format, seed, digest)
    return 0


def _cmd_histogram(args) -> int:
    tokens = [t for t in args.strategies.split(",") if t]
    if not tokens:
        raise ConfigError(f"--strategies gave no tokens: {args.strategies!r}")
    results = load_results(args.run_dir)
    missing = sorted(set(tokens) - set(results))
    if missing:
        raise ConfigError(f"strategies {missing} have no logs under {args.run_dir}")
    samples = {
        token: np.concatenate([r.final_consumptions for r in results[token]])
        for token in tokens
    }
    seed, digest, _ = _run_metadata(args.run_dir)
    out = args.out if args.out else Path(args.run_dir) / "histogram.svg"
    path = emit_histogram(
        samples,
        out,
        meta={"artifact": "fairsoc", "version": __version__, "seed": seed, "config_digest": digest},
    )
    print(f"wrote {path}")
    return 0


def _run_metadata(run_dir: Path) -> tuple[int, str, str]:
    """Pull seed, digest, and log format from a run's meta.json."""
    meta_path = Path(run_dir) / "meta.json"
    if not meta_path.exists():
        return 0, "unknown", "csv"
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    log_format = meta.get("config", {}).get("log_format", "csv")
    return int(meta.get("seed", 0)), str(meta.get("config_digest", "unknown")), log_format


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fairsoc: config error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"fairsoc: invariant violation: {exc}", file=sys.stderr)
        return 3
    except (OSError, ParameterError, ValueError, RuntimeError) as exc:
        print(f"fairsoc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
