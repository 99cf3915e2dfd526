"""Stateless random streams.

Every stream is a pure function of a 64-bit master seed and an integer key
tuple, so work can be split across processes in any order and still replay
bit-for-bit.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def stream(seed, *key):
    """Return a ``numpy.random.Generator`` for ``(seed, key...)``.

    Uses ``SeedSequence`` spawn keys, which hash the key into independent
    Philox-style state without touching any global generator.
    """
    ss = np.random.SeedSequence(int(seed) & MASK64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def block_ranges(trials, block_size):
    """Split ``range(trials)`` into fixed-size blocks ``(index, start, stop)``.

    Block boundaries depend only on ``trials`` and ``block_size``; this is what
    makes results independent of worker count.
    """
    return [
        (i, start, min(start + block_size, trials))
        for i, start in enumerate(range(0, trials, block_size))
    ]
