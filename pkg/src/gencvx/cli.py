"""Command line entry point.

    gencvx analyze --config FILE [--fixture NAME] [--seed N] [--format json|markdown]
                   [--modes LIST] [--out PATH]
    gencvx fixtures list
    gencvx fixtures export DIR
"""

from __future__ import annotations

import argparse
import sys

from .config import AnalysisConfig, FORMATS, load_config, parse_modes
from .errors import GencvxError
from .fixtures import export_fixtures, load_fixtures
from .report import EXIT_USAGE, emit, run_analysis


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gencvx", description="Sampled second-order convexity checks.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run an analysis described by a config file")
    a.add_argument("--config", help="INI config file (optional when --fixture and --seed are given)")
    a.add_argument("--fixture", help="built-in fixture name, overrides the config function")
    a.add_argument("--seed", type=int)
    a.add_argument("--format", choices=FORMATS)
    a.add_argument("--modes", help="comma separated subset of necessary,sufficient,oracles,subdiff-only")
    a.add_argument("--out", help="write the report here instead of stdout")

    fx = sub.add_parser("fixtures", help="list or export the built-in fixtures")
    fsub = fx.add_subparsers(dest="fixtures_command", required=True)
    fsub.add_parser("list")
    ex = fsub.add_parser("export")
    ex.add_argument("dir")
    return p


def _analyze(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        cfg = cfg.with_cli(args.fixture, args.seed, args.format, args.modes)
    else:
        if args.fixture is None or args.seed is None:
            raise SystemExit("analyze needs --config, or both --fixture and --seed")
        kw = dict(fixture=args.fixture, seed=args.seed)
        if args.format:
            kw["format"] = args.format
        if args.modes is not None:
            kw["modes"] = parse_modes(args.modes)
        cfg = AnalysisConfig(**kw)
    report = run_analysis(cfg)
    text = emit(report, cfg.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return report.exit_status


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    try:
        if args.command == "analyze":
            return _analyze(args)
        if args.fixtures_command == "list":
            for fx in load_fixtures():
                flags = ", ".join(p.value for p, v in fx.expected.items() if v) or "none"
                print(f"{fx.name}\t{fx.spec.value_source}\t[{flags}]")
            return 0
        for path in export_fixtures(args.dir):
            print(path)
        return 0
    except SystemExit as exc:
        print(f"error: {exc.code}", file=sys.stderr)
        return EXIT_USAGE
    except (GencvxError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
