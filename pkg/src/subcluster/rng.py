"""Deterministic counter-based randomness.

All sampled-walk machinery draws its randomness from SplitMix64 counter
streams.  A walk's stream is keyed by (master seed, purpose tag, vertex,
walk index), so every trajectory is a pure function of those values:
results are reproducible bit-for-bit and independent of execution order,
batching, chunk layout, and thread count.

Coarser-grained randomness (vertex sampling, graph generation) uses
numpy's Philox generator, also counter-based, keyed through the same
derivation function.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_key", "philox", "mix64", "walk_key", "stream_draw"]

_GAMMA = 0x9E3779B97F4A7C15
_MASK = 0xFFFFFFFFFFFFFFFF


def derive_key(*parts) -> int:
    """Hash an arbitrary tuple of ints/strings into a 64-bit stream key."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, (int, np.integer)):
            h.update(b"i")
            h.update(int(p).to_bytes(16, "little", signed=True))
        elif isinstance(p, str):
            h.update(b"s")
            h.update(p.encode())
            h.update(b"\x00")
        else:
            raise TypeError(f"cannot derive key from {type(p)!r}")
    return int.from_bytes(h.digest(), "little")


def philox(*parts) -> np.random.Generator:
    """Counter-based numpy generator keyed by the derived 64-bit key."""
    return np.random.Generator(np.random.Philox(key=derive_key(*parts)))


def mix64(z: int) -> int:
    """SplitMix64 finalizer (Vigna); reference for the jitted kernels."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def walk_key(base: int, walk_index: int) -> int:
    """Per-walk stream key; decorrelates adjacent walk indices."""
    return mix64((base + walk_index * _GAMMA) & _MASK)


def stream_draw(key: int, counter: int) -> int:
    """The counter-th 64-bit output of the stream with the given key."""
    return mix64((key + (counter + 1) * _GAMMA) & _MASK)
