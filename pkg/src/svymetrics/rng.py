"""Reproducible random streams.

Every stochastic operation takes an explicit ``numpy.random.Generator``.
The simulation harness derives one independent stream per (master seed,
replicate index, stage tag) so replicates are reproducible individually
and in any execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _token(part: int | str) -> int:
    if isinstance(part, int):
        if part < 0:
            raise ValueError("seed path parts must be non-negative")
        return part
    digest = hashlib.sha256(part.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_stream(master_seed: int, *path: int | str) -> np.random.Generator:
    """Return an independent generator for (master_seed, *path).

    String parts are hashed stably (sha256) so tags like ``"split"`` or
    ``"train:forest"`` map to fixed integers across runs and platforms.
    """
    entropy = [_token(master_seed)] + [_token(p) for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def stream_seed(master_seed: int, *path: int | str) -> int:
    """Return the integer seed backing ``derive_stream`` for the same path."""
    entropy = [_token(master_seed)] + [_token(p) for p in path]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
