"""Seeding helpers: every randomized entry point takes a Generator derived here."""

import numpy as np


def make_rng(seed=None):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_rngs(seed, n):
    """Independent child generators derived from one master seed."""
    if isinstance(seed, np.random.Generator):
        children = seed.bit_generator.seed_seq.spawn(n)
    else:
        children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.default_rng(c) for c in children]


def spawn_seeds(seed, n):
    """Integer seeds for child processes (picklable, reproducible)."""
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in ss.spawn(n)]
