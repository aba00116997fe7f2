"""Deterministic random-stream derivation.

Every stochastic component draws from a stream derived from
(master_seed, *path) where the path is a tuple of small integer tags and
indices (replicate number, simulation day, sample index, ...). Streams are
derived by hash-mixing the whole tuple through numpy's SeedSequence, so a
stream depends only on its coordinates, never on evaluation order or on how
many workers are running. That property is what makes byte-identical reruns
across worker counts possible.
"""

from __future__ import annotations

import numpy as np

# Stream tags. Values are arbitrary but frozen: changing them changes every
# derived stream and therefore every simulated trajectory.
TAG_NETWORK = 1
TAG_INITIAL_INFECTIONS = 2
TAG_DISEASE = 3
TAG_SELECTION = 4
TAG_SAMPLES = 5
TAG_SAMPLE_EDGES = 6


def child_seed(master_seed: int, *path: int) -> int:
    """Derive a 63-bit child seed from a master seed and a coordinate path."""
    ss = np.random.SeedSequence((int(master_seed),) + tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def child_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Generator seeded from (master_seed, *path); independent per path."""
    ss = np.random.SeedSequence((int(master_seed),) + tuple(int(p) for p in path))
    return np.random.default_rng(ss)
