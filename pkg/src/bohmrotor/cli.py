"""Batch command-line interface.

    bohmrotor run --preset <name> [--config <file>] [--set key=value]... --out <dir>
    bohmrotor validate --config <file>

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import load_config
from .errors import BohmRotorError, ConfigurationError
from .presets import PRESETS, run_preset


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bohmrotor",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment preset")
    run.add_argument("--preset", required=True, choices=sorted(PRESETS))
    run.add_argument("--config", default=None, help="INI config file")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config key")
    run.add_argument("--out", required=True, help="output directory")

    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("--config", required=True)
    val.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        if args.command == "validate":
            cfg.validate()
            print("config ok")
            return 0
        cfg = replace(cfg, out_dir=args.out, preset=args.preset)
        paths = run_preset(args.preset, cfg)
        for path in paths:
            print(path)
        return 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (BohmRotorError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
