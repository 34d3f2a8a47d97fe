"""Deterministic randomness for reproducible mappings, samples, and logs.

Every random draw in this package flows from the SplitMix64 generator defined
here (or its compiled twin in ``_kernels``), so any result can be reproduced
bit for bit from a 64-bit seed — by this package or by a reimplementation in
another language that follows the same rules.

Generator (SplitMix64, Steele/Lea/Flood, public domain; reference constants
as in Vigna's ``splitmix64.c``)::

    state  <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z      <- state
    z      <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9   mod 2^64
    z      <- (z xor (z >> 27)) * 0x94D049BB133111EB   mod 2^64
    output <- z xor (z >> 31)

Derived draws, all exactly specified:

* ``randbelow(k)``: draw 64-bit words, rejecting any word greater than
  ``2^64 - (2^64 mod k) - 1``; the first accepted word modulo ``k`` is the
  result. Rejection keeps the draw exactly uniform.
* ``random()``: ``(next_u64() >> 11) * 2**-53``, a double in [0, 1).
* in-place shuffle: Fisher-Yates, ``i`` from ``len-1`` down to 1,
  ``j = randbelow(i + 1)``, swap ``a[i], a[j]``.
* ``split(items, k)``: partial Fisher-Yates — ``i`` from 0 to ``k-1``,
  ``j = i + randbelow(len - i)``, swap; the first ``k`` slots are the draws,
  in draw order, and the rest are returned in original order.

Independent streams are keyed with :func:`derive_seed`, which hashes its
arguments with SHA-256 and keeps the first 8 digest bytes (big-endian), so a
stream's seed never depends on how work happens to be scheduled.
"""

from __future__ import annotations

import hashlib
from typing import Sequence, TypeVar

U64_MASK = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

T = TypeVar("T")


class SplitMix64:
    """The package-wide deterministic generator. See the module docstring."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & U64_MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & U64_MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & U64_MASK
        z = ((z ^ (z >> 27)) * _MIX2) & U64_MASK
        return (z ^ (z >> 31)) & U64_MASK

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound) via modulo with rejection."""
        if bound < 1:
            raise ValueError(f"bound must be >= 1, got {bound}")
        limit = U64_MASK - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r <= limit:
                return r % bound

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random mantissa bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def shuffle(self, items) -> None:
        """In-place Fisher-Yates shuffle of a mutable sequence."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def split(self, items: Sequence[T], k: int) -> tuple[list[T], list[T]]:
        """Draw ``k`` items without replacement; return (drawn, remaining).

        Drawn items come back in draw order; the remainder keeps the original
        sequence order.
        """
        n = len(items)
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} items from {n}")
        idx = list(range(n))
        for i in range(k):
            j = i + self.randbelow(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        chosen = set(idx[:k])
        return [items[p] for p in idx[:k]], [items[p] for p in range(n) if p not in chosen]


def index_permutation(count: int, seed: int) -> list[int]:
    """Seeded permutation of range(count): the reference mapping shuffle.

    This is the pure-Python definition of the shuffle used for retina tuple
    mappings; ``_kernels.shuffle_indices`` must produce the identical result.
    """
    order = list(range(count))
    SplitMix64(seed).shuffle(order)
    return order


def derive_seed(*parts) -> int:
    """Derive an independent 64-bit stream seed from a tuple of key parts.

    Parts are stringified, joined with the unit separator (0x1F), UTF-8
    encoded, and hashed with SHA-256; the first 8 digest bytes, big-endian,
    are the seed.
    """
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
