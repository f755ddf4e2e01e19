"""Counter-based random numbers and seed derivation.

Every random draw in the package is a pure function of a 64-bit stream word
and a counter, so a replica can be regenerated from ``(master_seed, tag,
replica)`` alone, on any worker, in any order.

The mixing function is the SplitMix64 finalizer. A stream with word ``k``
returns ``mix64(k + (i + 1) * GOLDEN)`` for its ``i``-th draw. The compiled
core in ``_core.pyx`` reproduces these functions bit for bit.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV52 = 1.0 / 4503599627370496.0  # 2**-52


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def bits_to_uniform(bits: int) -> float:
    """Map 64 random bits to a double in the open interval (0, 1)."""
    return ((bits >> 12) + 0.5) * _INV52


def stream_uniform(word: int, counter: int) -> float:
    return bits_to_uniform(mix64((word + ((counter + 1) * GOLDEN)) & MASK64))


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` over a uint64 array (multiplication wraps mod 2^64)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def stream_uniforms(word: int, start: int, count: int) -> np.ndarray:
    """Draws ``start, ..., start + count - 1`` of the stream, as in :func:`stream_uniform`."""
    i = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(word & MASK64) + i * np.uint64(GOLDEN)
    bits = mix64_array(z)
    return ((bits >> np.uint64(12)).astype(np.float64) + 0.5) * _INV52


def pair_word(word: int, coords_u, coords_v) -> int:
    """Stream word for one unordered vertex pair, given in canonical order.

    Depends only on the absolute coordinates, so the same pair sees the
    same uniform regardless of box size or kernel.
    """
    h = mix64(word ^ 0x5851F42D4C957F2D)
    for c in coords_u:
        h = mix64(h ^ (int(c) & MASK64))
    h = mix64(h ^ 0x14057B7EF767814F)
    for c in coords_v:
        h = mix64(h ^ (int(c) & MASK64))
    return h


@dataclass(frozen=True)
class StreamKey:
    """Identity of one random stream.

    Two keys are equal iff all three fields are equal, so distinct
    ``(tag, replica)`` pairs are distinct keys. ``word`` is the 64-bit digest
    fed to the generators; it is a keyed BLAKE2b hash, stable across
    platforms and releases.
    """

    master_seed: int
    tag: str
    replica: int

    @property
    def word(self) -> int:
        payload = f"{self.master_seed & MASK64}\x1f{self.tag}\x1f{self.replica}".encode()
        digest = hashlib.blake2b(payload, digest_size=8, person=b"lrperc-v1").digest()
        return int.from_bytes(digest, "little")

    def numpy_generator(self) -> np.random.Generator:
        """A Philox generator (also counter-based) keyed by this stream."""
        return generator_from_word(self.word)


def generator_from_word(word: int) -> np.random.Generator:
    word &= MASK64
    return np.random.Generator(np.random.Philox(key=[word, mix64(word)]))


def as_word(seed) -> int:
    """Accept a :class:`StreamKey` or a raw 64-bit integer."""
    if isinstance(seed, StreamKey):
        return seed.word
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        return int(seed) & MASK64
    raise TypeError(f"seed must be a StreamKey or an integer, got {type(seed).__name__}")


def seed_derivation(master_seed: int, purpose_tag: str, replica_index: int) -> StreamKey:
    if replica_index < 0:
        raise ValueError("replica_index must be nonnegative")
    return StreamKey(int(master_seed) & MASK64, str(purpose_tag), int(replica_index))
