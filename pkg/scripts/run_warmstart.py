"""Meta-trained vs random initialization for single-point thermal training.

Loads a trained checkpoint and, at each requested field value, tunes the
circuit twice from scratch budgets: once starting from the checkpoint's
angles, once from random angles.  The summary metric is the mean fidelity
advantage of the warm start.
"""

from __future__ import annotations

import argparse
import sys

from metatherm.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("checkpoint", help="path to a trained checkpoint.json")
    ap.add_argument("--h", default="0.0, 0.5, 1.0, 1.5, 2.0",
                    help="comma-separated field values")
    ap.add_argument("--epochs", type=int, default=100, help="tuning epochs per run")
    ap.add_argument("--seeds", type=int, default=3, help="random restarts per point")
    ap.add_argument("--lr", type=float, default=0.01)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    argv = [
        "warmstart-vqt",
        "--set", f"checkpoint={args.checkpoint}",
        "--set", f"warm.h=list({args.h})",
        "--set", f"warm.epochs={args.epochs}",
        "--set", f"warm.seeds={args.seeds}",
        "--set", f"warm.lr={args.lr}",
    ]
    if args.out:
        argv += ["--out", args.out]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
