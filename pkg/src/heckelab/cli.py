"""Command line entry point: ``python -m heckelab``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .campaign import SUITES, CampaignConfig, ConfigError, run_campaign
from .curves import registry
from .report import emit_report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heckelab", description="Run a verification campaign and emit a report.")
    ap.add_argument("--config", help="JSON campaign configuration")
    ap.add_argument("--curve", action="append", help="curve label (repeatable)")
    ap.add_argument("--a", type=int, action="append", help="weight a (repeatable)")
    ap.add_argument("--n", type=int, action="append", help="non-critical n (repeatable)")
    ap.add_argument("--p", type=int, action="append", help="split ordinary prime (repeatable)")
    ap.add_argument("--digits", type=int)
    ap.add_argument("--padic-prec", type=int)
    ap.add_argument("--q-order", type=int)
    ap.add_argument("--suite", action="append", help=f"enable only these suites: {', '.join(SUITES)}, or 'none'")
    ap.add_argument("--cache-dir")
    ap.add_argument("--no-cache", action="store_true")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--format", choices=("json", "table"), default="json")
    ap.add_argument("--quiet", action="store_true", help="no progress on stderr")
    return ap


def config_from_args(args) -> CampaignConfig:
    cfg = CampaignConfig.from_file(args.config) if args.config else CampaignConfig()
    if args.curve:
        cfg.curves = args.curve
        if not args.p and not args.config:
            # first recorded prime of each curve
            reg = registry()
            cfg.primes = sorted({min(reg[c].primes) for c in args.curve if c in reg}) or cfg.primes
    for flag, name in (("a", "a_grid"), ("n", "n_grid"), ("p", "primes")):
        if getattr(args, flag):
            setattr(cfg, name, getattr(args, flag))
    for flag, name in (("digits", "digits"), ("padic_prec", "padic_prec"), ("q_order", "q_order"),
                       ("cache_dir", "cache_dir"), ("workers", "workers"), ("out", "out")):
        if getattr(args, flag) is not None:
            setattr(cfg, name, getattr(args, flag))
    if args.no_cache:
        cfg.cache_dir = None
    if args.suite:
        wanted = {s for item in args.suite for s in item.split(",") if s and s != "none"}
        unknown = wanted - set(SUITES)
        if unknown:
            raise ConfigError("suites", f"unknown suites {sorted(unknown)}")
        cfg.suites = {s: s in wanted for s in SUITES}
    return cfg.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    report = run_campaign(cfg, progress=not args.quiet)
    data = emit_report(report, args.format)
    if cfg.out:
        Path(cfg.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    s = report.summary
    if not args.quiet:
        print(f"{s['passed']}/{s['total']} checks passed", file=sys.stderr)
    return 0 if report.ok else 1
