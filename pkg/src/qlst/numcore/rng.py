"""Deterministic named RNG streams.

Every consumer of randomness (init, dropout, sampling, shuffling, ...) gets
its own stream derived from (seed, name), so adding a consumer never shifts
the draws of another.
"""

import hashlib

import numpy as np


def _name_key(name: str) -> int:
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def named_stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for a (seed, consumer-name) pair."""
    return np.random.default_rng(np.random.SeedSequence([seed, _name_key(name)]))
