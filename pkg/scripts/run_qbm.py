"""Quantum Boltzmann machine demo on two qubits.

Trains a Heisenberg coefficient vector so that the visible distribution of
the prepared thermal state matches a target distribution.  The state
preparer is a frozen meta-trained checkpoint; only the Hamiltonian
coefficients are updated.
"""

from __future__ import annotations

import argparse
import sys

from metatherm.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("checkpoint", help="path to a heisenberg-family checkpoint.json")
    ap.add_argument("--target", default="0.62, 0.17, 0.17, 0.04",
                    help="comma-separated target probabilities, length 4")
    ap.add_argument("--epochs", type=int, default=200)
    ap.add_argument("--lr", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    argv = [
        "qbm",
        "--set", f"checkpoint={args.checkpoint}",
        "--set", f"qbm.target={args.target}",
        "--set", f"epochs={args.epochs}",
        "--set", f"lr={args.lr}",
        "--set", f"seed={args.seed}",
    ]
    if args.out:
        argv += ["--out", args.out]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
