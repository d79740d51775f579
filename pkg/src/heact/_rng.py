"""Seeded, platform-independent random streams.

Normal deviates are produced by Box-Muller on top of a vectorised
splitmix64 stream, so the same seed yields bit-identical samples on every
platform and numpy version.  Heavier randomness consumers (key generation,
blob datasets) use ``numpy.random.Generator`` instead; only the sample sets
that feed reported tables need the stronger guarantee.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed, n, offset=0):
    """Return ``n`` consecutive splitmix64 outputs as uint64, starting at
    stream position ``offset`` for the given seed."""
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    z = np.uint64(seed) + idx * _GAMMA
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniform01(seed, n, offset=0):
    """Uniform doubles in (0, 1], 53-bit resolution."""
    bits = splitmix64(seed, n, offset)
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def normal(seed, n, mean=0.0, sd=1.0):
    """``n`` Box-Muller normal deviates with the given mean and sd."""
    u = uniform01(seed, 2 * n)
    u1, u2 = u[0::2], u[1::2]
    g = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return mean + sd * g
