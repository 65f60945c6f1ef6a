"""Deterministic seed derivation.

One global 64-bit seed governs the whole pipeline; per-stage and per-segment
generators are derived by hashing (global seed, stage name, segment id), so
output is independent of scheduling and identical across platforms.
"""

from __future__ import annotations

import hashlib
import random

_DOMAIN = b"qeforge.seed.v1"

MAX_SEED = 2**64 - 1


def derive_seed(*parts: int | str) -> int:
    """Hash the given parts into a 64-bit seed, order-sensitive."""
    h = hashlib.blake2b(_DOMAIN, digest_size=8)
    for part in parts:
        raw = str(part).encode("utf-8")
        h.update(len(raw).to_bytes(4, "big"))
        h.update(raw)
    return int.from_bytes(h.digest(), "big")


def rng_for(*parts: int | str) -> random.Random:
    """A fresh generator seeded from the derived 64-bit seed."""
    return random.Random(derive_seed(*parts))
