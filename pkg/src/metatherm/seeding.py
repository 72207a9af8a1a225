"""Deterministic, splittable random streams.

All randomness in a run flows from one 64-bit seed.  Independent consumers
(parameter init, grid draws, ...) get their own labelled stream, so adding or
reordering consumers never perturbs the draws of the others.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_key(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, *labels: str) -> np.random.Generator:
    """Generator for the (seed, labels...) path, stable across runs and platforms."""
    key = tuple(_label_key(lab) for lab in labels)
    seq = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=key)
    return np.random.Generator(np.random.PCG64(seq))
