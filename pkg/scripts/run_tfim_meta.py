"""Train the meta ansatz on a transverse-field chain and test against the oracle.

Trains on 10 uniform field values in [-2, 2], then scores fidelity and
free-energy error on a 40-point grid through the `train-meta` CLI command.
"""

from __future__ import annotations

import argparse
import sys

from metatherm.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2, help="system qubits (default 2)")
    ap.add_argument("--layers", default="2,2", help="encoding,hva layer counts")
    ap.add_argument("--epochs", type=int, default=1000)
    ap.add_argument("--lr", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="output root (default runs/)")
    args = ap.parse_args()
    l_enc, l_hva = (int(v) for v in args.layers.split(","))

    argv = [
        "train-meta",
        "--set", "family.kind=tfim",
        "--set", f"family.n={args.n}",
        "--set", "grid.train=uniform(-2, 2, 10)",
        "--set", "grid.test=uniform(-2, 2, 40)",
        "--set", f"epochs={args.epochs}",
        "--set", f"lr={args.lr}",
        "--set", f"seed={args.seed}",
        "--set", f"layers.enc={l_enc}",
        "--set", f"layers.hva={l_hva}",
    ]
    if args.out:
        argv += ["--out", args.out]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
