"""Finite-temperature crossover study on the Kitaev ring.

Two runs: an exact susceptibility scan over the coupling window (crossover
temperature per field value), and a low-temperature meta-ansatz training run
across the same window scored on a 40-point test grid.
"""

from __future__ import annotations

import argparse
import sys

from metatherm.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=int, default=3, help="unit cells (default 3)")
    ap.add_argument("--temp", type=float, default=0.1, help="training temperature")
    ap.add_argument("--epochs", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip-train", action="store_true", help="only run the scan")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    out = ["--out", args.out] if args.out else []

    scan = [
        "phase-scan",
        "--set", "family.kind=kitaev",
        "--set", f"family.n={args.cells}",
        "--set", "grid.h=uniform(0.7, 1.2, 6)",
    ] + out
    code = cli_main(scan)
    if code != 0 or args.skip_train:
        return code

    train = [
        "train-meta",
        "--set", "family.kind=kitaev",
        "--set", f"family.n={args.cells}",
        "--set", f"beta={1.0 / args.temp}",
        "--set", "grid.train=uniform(0.7, 1.2, 20)",
        "--set", "grid.test=uniform(0.7, 1.2, 40)",
        "--set", f"epochs={args.epochs}",
        "--set", f"seed={args.seed}",
        "--set", "layers.enc=4",
        "--set", "layers.hva=1",
    ] + out
    return cli_main(train)


if __name__ == "__main__":
    sys.exit(main())
