"""Deterministic sub-seed derivation.

Every pipeline stage derives its own 64-bit seed from the master seed and a
stage label, so reruns with the same master seed replay every stage exactly
while stages stay statistically independent of each other.
"""

from __future__ import annotations

import hashlib


def derive_seed(master_seed: int, label: str) -> int:
    """64-bit seed from blake2b over "<master_seed>:<label>"."""
    digest = hashlib.blake2b(
        f"{master_seed}:{label}".encode("utf-8"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")
