"""Train the network-driven ansatz on a transverse-field chain.

A small fully-connected network maps the field value to every circuit angle;
training and test grids match the meta-ansatz experiment so the two runs are
directly comparable.
"""

from __future__ import annotations

import argparse
import sys

from metatherm.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2, help="system qubits (default 2)")
    ap.add_argument("--su2", type=int, default=4, help="rotation layers")
    ap.add_argument("--hva", type=int, default=0, help="Hamiltonian layers")
    ap.add_argument("--hidden", default="16", help="hidden widths, comma separated")
    ap.add_argument("--epochs", type=int, default=2000)
    ap.add_argument("--lr", type=float, default=0.001)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    argv = [
        "train-nn-meta",
        "--set", "family.kind=tfim",
        "--set", f"family.n={args.n}",
        "--set", "grid.train=uniform(-2, 2, 10)",
        "--set", "grid.test=uniform(-2, 2, 40)",
        "--set", f"epochs={args.epochs}",
        "--set", f"lr={args.lr}",
        "--set", f"seed={args.seed}",
        "--set", f"layers.su2={args.su2}",
        "--set", f"layers.hva={args.hva}",
        "--set", f"mlp.hidden={args.hidden}",
    ]
    if args.out:
        argv += ["--out", args.out]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
