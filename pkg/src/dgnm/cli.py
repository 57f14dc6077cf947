"""Command line entry point.

    dgnm <experiment> [--config PATH] [--out DIR] [--workers N] [--seed-override K]
    dgnm desk [--out DIR] [--workers N] [--seed-override K]

Without ``--config`` the desk-profile configuration of the experiment is used.
The exit code is 0 iff every check of every report passed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, format_config, load_config
from .experiments import desk_configs, run
from .report import write_report


def _desk_config(name: str):
    for cfg in desk_configs():
        if cfg.experiment == name:
            return cfg
    raise KeyError(name)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgnm", description="Regularity-theory experiments on rough elliptic coefficients")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS + ("desk",):
        p = sub.add_parser(name, help="run the whole desk suite" if name == "desk" else f"run the {name} experiment")
        if name != "desk":
            p.add_argument("--config", type=Path, help="INI configuration file")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--seed-override", type=int, default=None, metavar="K",
                       help="replace the configured seeds by the single seed K")
    sub.add_parser("show-config", help="print the desk configuration of an experiment").add_argument(
        "experiment", choices=EXPERIMENTS)
    return parser


def _execute(cfg, out: Path, workers: int, seed_override) -> bool:
    if seed_override is not None:
        cfg = cfg.with_seeds([seed_override])
    report = run(cfg, workers=workers)
    write_report(report, out)
    (out / "config.ini").write_text(format_config(cfg))
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} {cfg.experiment}: {len(report.runs)} runs -> {out}")
    for check in report.failed_checks():
        print(f"  FAIL {check['name']}: {check['detail']}")
    return report.passed


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "show-config":
        sys.stdout.write(format_config(_desk_config(args.experiment)))
        return 0
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 2
    if args.command == "desk":
        root = args.out or Path("reports")
        ok = True
        for cfg in desk_configs():
            ok &= _execute(cfg, root / cfg.experiment, args.workers, args.seed_override)
        return 0 if ok else 1
    try:
        cfg = load_config(args.config) if args.config else _desk_config(args.command)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.experiment != args.command:
        print(f"error: config is for {cfg.experiment!r}, not {args.command!r}", file=sys.stderr)
        return 2
    out = args.out or Path(cfg.out) / cfg.experiment
    return 0 if _execute(cfg, out, args.workers, args.seed_override) else 1


if __name__ == "__main__":
    sys.exit(main())
