"""Deterministic 64-bit mixing used to derive independent RNG streams.

The graph sampler decides each candidate edge from a hash of
(seed, low id, high id), so edge generation is independent of iteration
order and safe to parallelize.  The same mixer derives per-trial seeds in
the experiment harness: adding trials or interleaving n values never
reshuffles the seeds of earlier rows.
"""

from __future__ import annotations

import struct

_MASK = (1 << 64) - 1

# splitmix64 finalizer constants
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB

# stream salts / per-field multipliers
PAIR_SALT_LO = 0x9E3779B97F4A7C15
PAIR_SALT_HI = 0xC2B2AE3D27D4EB4F
EDGE_STREAM_SALT = 0xA0761D6478BD642F


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * _C1) & _MASK
    x = ((x ^ (x >> 27)) * _C2) & _MASK
    return x ^ (x >> 31)


def edge_stream_seed(seed: int) -> int:
    """Seed of the per-pair edge stream for a graph sampled with `seed`."""
    return mix64((seed & _MASK) ^ EDGE_STREAM_SALT)


def pair_uniform(seed: int, lo: int, hi: int) -> float:
    """Uniform in [0, 1) keyed by (seed, lo, hi); pure-Python reference."""
    lo, hi = int(lo), int(hi)
    h = mix64(((lo * PAIR_SALT_LO) & _MASK) ^ (seed & _MASK))
    h = mix64(h ^ ((hi * PAIR_SALT_HI) & _MASK))
    return (h >> 11) * 2.0**-53


def trial_seed(base_seed: int, n: float, trial: int) -> int:
    """Per-trial seed for (base_seed, n, trial), stable under list growth.

    n enters through its IEEE-754 bit pattern so float and int spellings
    of the same value agree.
    """
    (n_bits,) = struct.unpack("<Q", struct.pack("<d", float(n)))
    h = mix64(base_seed & _MASK)
    h = mix64(h ^ n_bits)
    h = mix64(h ^ (trial & _MASK))
    return h
