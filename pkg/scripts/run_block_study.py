"""Measurement-grouping study for two-qubit Hamiltonian variants.

Prints, for a ladder of increasingly rich two-qubit Hamiltonians, how many
groups of mutually commuting Pauli terms the greedy partitioner finds.
Each group can be estimated with a single measurement setting, so the
count is the per-shot measurement overhead of the model.
"""

from __future__ import annotations

import sys

from metatherm import hamiltonians as H


def fields(axes: str) -> list[tuple[float, str]]:
    """Single-site field terms on both qubits, one per requested axis."""
    out = []
    for q in range(2):
        for ax in axes:
            w = ["I", "I"]
            w[q] = ax
            out.append((-1.0, "".join(w)))
    return out


VARIANTS = [
    ("XX", [(-1.0, "XX")]),
    ("XX + X fields", [(-1.0, "XX")] + fields("X")),
    ("XX + XZ fields", [(-1.0, "XX")] + fields("XZ")),
    ("XX + XZY fields", [(-1.0, "XX")] + fields("XZY")),
    ("XX+YY + XZY fields", [(-1.0, "XX"), (-1.0, "YY")] + fields("XZY")),
    ("XX+YY+ZZ + XZY fields",
     [(-1.0, "XX"), (-1.0, "YY"), (-1.0, "ZZ")] + fields("XZY")),
]


def main() -> int:
    print(f"{'model':<24} {'terms':>5} {'groups':>6}")
    for name, terms in VARIANTS:
        hs = H.pauli_sum(2, terms)
        count, blocks = H.commuting_blocks(hs)
        assert sorted(i for b in blocks for i in b) == list(range(len(terms)))
        print(f"{name:<24} {len(terms):>5} {count:>6}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
