"""Deterministic random streams keyed by (master seed, tag, indices).

Every consumer asks for its own stream instead of sharing a global generator,
so results do not depend on evaluation order.
"""

from __future__ import annotations

import hashlib

import numpy as np

DEFAULT_SEED = 0


def _tag_key(tag: str) -> tuple[int, int]:
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=16).digest()
    return int.from_bytes(digest[:8], "little"), int.from_bytes(digest[8:], "little")


def derive_seed_sequence(master_seed: int, tag: str, *indices: int) -> np.random.SeedSequence:
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master_seed}")
    for i in indices:
        if i < 0:
            raise ValueError(f"stream indices must be nonnegative, got {i}")
    # The index count is part of the key so (tag, 1) and (tag, 1, 0) differ.
    key = (*_tag_key(tag), len(indices), *(int(i) for i in indices))
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)


def derive_stream(master_seed: int, tag: str, *indices: int) -> np.random.Generator:
    """Independent generator for one consumer; identical inputs give identical streams."""
    return np.random.Generator(np.random.PCG64(derive_seed_sequence(master_seed, tag, *indices)))
