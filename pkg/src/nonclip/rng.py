"""Deterministic random streams built on a 64-bit counter-based generator.

Every source of randomness in the package (problem data, noise, output-iterate
sampling, power-iteration start vectors) is a named stream: a numpy Philox-4x64
generator whose 64-bit key is derived from a user seed and a purpose tag.  The
derivation is pure integer arithmetic, so identical (seed, tag) pairs produce
identical streams on every platform.  Reference values live in docs/rng.md and
tests/test_rng.py.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# FNV-1a 64-bit offset basis / prime.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    """FNV-1a hash of a UTF-8 string, reduced to 64 bits."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def splitmix64(z: int) -> int:
    """One SplitMix64 output step for the given 64-bit state."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, tag: str) -> int:
    """Mix a seed and a purpose tag into a Philox key."""
    return splitmix64((int(seed) ^ fnv1a64(tag)) & _MASK64)


def stream(seed: int, tag: str) -> np.random.Generator:
    """Independent generator for the given (seed, tag) pair."""
    return np.random.Generator(np.random.Philox(key=derive_key(seed, tag)))
