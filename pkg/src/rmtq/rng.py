"""Deterministic random-source derivation for seeded experiments.

Every trial of every experiment draws from its own substream, keyed by the
master seed plus a label path such as ``("annealed_gap", 100, 0, 17)``.  The
key is hashed, so streams do not depend on schedule order and sibling streams
are statistically independent.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_substream", "substream_key"]


def substream_key(master_seed: int, *labels: object) -> int:
    """Collision-free 128-bit key for a (seed, label path) pair."""
    path = "/".join(str(lab) for lab in labels)
    digest = hashlib.blake2b(
        f"{int(master_seed)}:{path}".encode(), digest_size=16
    ).digest()
    return int.from_bytes(digest, "little")


def derive_substream(master_seed: int, *labels: object) -> np.random.Generator:
    """Return the deterministic generator for one label path.

    The same ``(master_seed, labels)`` pair always yields an identical stream,
    independent of how many other substreams were derived before it.
    """
    return np.random.default_rng(np.random.SeedSequence(substream_key(master_seed, *labels)))
