"""Command-line front end (``stark-embed``)."""

from __future__ import annotations

import argparse
import sys

from ..errors import ArgumentError
from .commands import (EXIT_USAGE, cmd_construct, cmd_export, cmd_sweep,
                       cmd_verify)
from .config import RunConfig, load_config

COMMANDS = {"construct": cmd_construct, "verify": cmd_verify,
            "sweep": cmd_sweep, "export": cmd_export}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stark-embed",
        description="Construct and verify potentials with embedded "
                    "eigenvalues for Stark-type operators.")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {"construct": "build a potential and write a bundle",
             "verify": "recompute checks against a stored bundle",
             "sweep": "scan couplings and tabulate verdicts",
             "export": "write plot-ready CSV series from a bundle"}
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", metavar="PATH",
                        required=name in ("construct", "sweep"))
        sp.add_argument("--out", metavar="DIR")
        sp.add_argument("--jobs", type=int, default=None)
        sp.add_argument("--seed", type=int, default=None)
        if name in ("verify", "export"):
            sp.add_argument("bundle", nargs="?", help="bundle directory")
        if name == "export":
            sp.add_argument("--format", choices=("csv", "json"), default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.command, args.config, out=args.out,
                          seed=args.seed, jobs=args.jobs,
                          bundle=getattr(args, "bundle", None),
                          fmt=getattr(args, "format", None))
    except ArgumentError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return COMMANDS[args.command](cfg)


__all__ = ["main", "build_parser", "RunConfig", "load_config"]
