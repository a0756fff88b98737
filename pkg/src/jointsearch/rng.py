"""Counter-based random numbers.

Every draw is a pure function of a stream key and an integer counter, so
results do not depend on evaluation order or batching. Stream keys come from
BLAKE2b over the key parts; counters are mixed with SplitMix64.
"""

from __future__ import annotations

import hashlib

import numpy as np
from scipy.special import ndtri

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def stream_key(*parts) -> int:
    """Stable 64-bit key for a tuple of ints/strings/floats."""
    text = "\x1f".join(repr(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def uniform(key: int, counters) -> np.ndarray:
    """Uniform draws in the open interval (0, 1), one per counter."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _splitmix64(np.uint64(key) ^ _splitmix64(c * _GOLDEN))
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def normal(key: int, counters) -> np.ndarray:
    return ndtri(uniform(key, counters))
