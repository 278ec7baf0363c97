"""``embedq <command> --config <path> --out <dir>``."""

from __future__ import annotations

import argparse
import logging
import sys

from ..errors import ConfigError
from . import config as cfgmod
from .experiments import COMMANDS, EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="embedq", description=__doc__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON experiment config (defaults are used for missing keys)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--paper-scale", action="store_true", help="use dim H_e = 4096 (N = 8192)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for the seed pool")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = cfgmod.load(args.config, args.paper_scale) if args.config else cfgmod.resolve({}, args.paper_scale)
        return COMMANDS[args.command](cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
