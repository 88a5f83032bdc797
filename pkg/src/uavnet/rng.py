"""Deterministic random substreams.

A run seed is split into independent per-UAV, per-purpose streams with
``numpy.random.SeedSequence`` spawn keys, so each stream is fixed by
``(seed, uav, purpose)`` alone and not by the order events interleave.
Streams are ``random.Random`` instances: scalar draws in the event loop are
much cheaper there than through numpy.
"""

from __future__ import annotations

import random

import numpy as np

PURPOSES = ("placement", "mobility", "traffic", "mac", "routing", "topology")


def substream(seed: int, *key: int) -> random.Random:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    state = ss.generate_state(4, dtype=np.uint32)
    return random.Random(int.from_bytes(state.tobytes(), "little"))


def uav_stream(seed: int, uav: int, purpose: str) -> random.Random:
    return substream(seed, 1, uav, PURPOSES.index(purpose))


def global_stream(seed: int, purpose: str) -> random.Random:
    return substream(seed, 0, PURPOSES.index(purpose))


def derive_seed(seed: int, *indices: int) -> int:
    """64-bit seed for a sweep cell / replication."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(indices))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
