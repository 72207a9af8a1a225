"""Command-line entry point.

Usage:
    metatherm <command> [--config FILE] [--set KEY=VALUE ...] [--out DIR]

A run is described by a config file and/or --set overrides; the subcommand
selects what to do.  On success the run summary is printed as JSON and the
exit code is 0.  Config problems exit 2, runtime failures exit 1, both with a
machine-readable JSON error on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import COMMANDS, parse_config
from .errors import Error, ParseError, ValidationError
from .runner import run, run_dir_for

_COMMAND_HELP = {
    "train-meta": "train a meta ansatz with encoded Hamiltonian parameters",
    "train-nn-meta": "train a network that maps Hamiltonian parameters to circuit angles",
    "eval": "evaluate a checkpoint against the exact oracle on a test grid",
    "warmstart-vqt": "compare meta-initialized vs random-initialized single-point training",
    "qbm": "train Hamiltonian coefficients so the prepared state matches a target distribution",
    "phase-scan": "susceptibility surface and crossover temperatures from the oracle",
    "oracle": "exact free energies over a parameter grid",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metatherm",
        description="meta-learned variational preparation of thermal quantum states",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        p = sub.add_parser(name, help=_COMMAND_HELP[name])
        p.add_argument("--config", metavar="FILE", help="key=value run description")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[],
            metavar="KEY=VALUE", help="override a config key (repeatable)",
        )
        p.add_argument("--out", metavar="DIR", help="output directory root")
    return parser


def _fail(exc: Exception, command: str | None, code: int) -> int:
    payload = {
        "error": type(exc).__name__,
        "message": str(exc),
        "command": command,
    }
    if isinstance(exc, ValidationError):
        payload["problems"] = exc.problems
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    overrides = list(args.overrides)
    if args.out is not None:
        overrides.append(f"out={args.out}")
    try:
        cfg = parse_config(args.config, tuple(overrides), args.command)
    except (ParseError, ValidationError) as e:
        return _fail(e, args.command, 2)
    try:
        record = run(cfg)
    except Error as e:
        return _fail(e, args.command, 1)
    except OSError as e:
        return _fail(e, args.command, 1)
    print(json.dumps({
        "command": cfg.command,
        "run_dir": run_dir_for(cfg),
        "config_hash": record.config_hash,
        "metrics": record.metrics,
    }, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
