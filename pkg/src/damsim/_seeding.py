"""Seed derivation.

All randomness comes from numpy's PCG64 bit generator, keyed through
``SeedSequence`` so that independent streams (pool, provider, shared
samples, purchases) never overlap.
"""

import numpy as np

GENERATOR = {"algorithm": "PCG64", "seeding": "SeedSequence", "library": "numpy", "version": 1}

# stream tags, appended to the entropy words
POOL = 1
PROVIDER = 2
SHARED = 3
PURCHASE = 4
MARKET = 5


def rng(*words):
    """Return a Generator keyed by a tuple of nonnegative integers."""
    entropy = [int(w) for w in words]
    if any(w < 0 for w in entropy):
        raise ValueError("seed words must be nonnegative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(*words):
    """Derive a 64-bit seed from a tuple of integers."""
    ss = np.random.SeedSequence([int(w) for w in words])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
