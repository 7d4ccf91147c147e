"""Deterministic seed splitting.

Every source of randomness in a run (environment, model init, replay
sampling, exploration noise, audio noise) gets its own child seed derived
from the run seed and a label. The derivation is a plain SHA-256 hash, so
it is stable across platforms and library versions.
"""

from __future__ import annotations

import hashlib


def split_seed(seed: int, label: str) -> int:
    """Derive a 63-bit child seed from (seed, label)."""
    digest = hashlib.sha256(f"{seed}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1
