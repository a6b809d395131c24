"""Reproducible random-number streams.

Every stochastic routine in this package draws from a Philox-4x64 counter
based generator (numpy's ``Philox`` bit generator).  Streams are identified
by a 64-bit key derived from ``(master_seed, stream_index, domain)`` with
the SplitMix64 finalizer (Steele, Lea & Flood, "Fast splittable pseudorandom
number generators", OOPSLA 2014), so that

* path ``i`` of a Monte Carlo run always sees the same stream no matter how
  work is sharded over threads, and
* distinct domains (simulation paths, Gaussian reference samples, ...) never
  share a stream even for equal indices.

All samplers in the simulation kernels consume raw ``next_double`` uniforms
from the stream and transform them by inverse CDF (or Marsaglia-Tsang for
the gamma law), which keeps the compiled and the pure-Python kernels bitwise
identical.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_DOMAIN_SALT = 0xD1B54A32D192ED03

# Stream domains.  Per-T offsets are added so paths of different horizons in
# one experiment are independent.
DOMAIN_PATHS = 0
DOMAIN_GAUSSIAN = 1 << 32


def splitmix64(z: int) -> int:
    """One output step of SplitMix64; a 64-bit finalizer with full avalanche."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(master_seed: int, index: int = 0, domain: int = 0) -> int:
    """64-bit Philox key of stream ``index`` in ``domain`` under ``master_seed``.

    Injective in ``index`` for a fixed seed and domain (the inner map is
    ``base + index * odd`` modulo 2^64, composed with a bijection).
    """
    base = splitmix64((master_seed + domain * _DOMAIN_SALT) & _MASK64)
    return splitmix64((base + index * _GOLDEN) & _MASK64)


def philox(key: int) -> np.random.Philox:
    """Philox-4x64 bit generator for a 64-bit stream key."""
    return np.random.Philox(key=key & _MASK64)


def generator(key: int) -> np.random.Generator:
    """numpy Generator wrapping :func:`philox`; ``.random()`` consumes one
    ``next_double`` per call, matching the compiled kernel's consumption."""
    return np.random.Generator(philox(key))
