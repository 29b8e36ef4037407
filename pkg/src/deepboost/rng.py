"""Portable deterministic randomness for dataset splitting.

SplitMix64 is used instead of numpy's generators so that split manifests
are bit-reproducible across platforms and numpy versions. Seeds for
sub-tasks (split repeats, per-class trainings) are derived by hashing the
parent seed together with string/int tokens.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Minimal SplitMix64 stream; enough for shuffles and seed derivation."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def randbelow(self, n: int) -> int:
        """Unbiased draw from range(n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (1 << 64) % n
        while True:
            x = self.next_u64()
            if x >= threshold:
                return x % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(seed: int, *tokens: int | str) -> int:
    """Derive a child seed from a parent seed and a token path.

    Tokens are absorbed byte-wise (ints as 8 little-endian bytes, strings
    as UTF-8 with a length prefix) so distinct paths give distinct streams.
    """
    h = mix64(seed)
    for tok in tokens:
        if isinstance(tok, str):
            data = tok.encode("utf-8")
            h = mix64(h ^ len(data))
        elif isinstance(tok, int):
            data = (tok & _MASK64).to_bytes(8, "little")
        else:
            raise TypeError(f"unsupported token type: {type(tok)!r}")
        for b in data:
            h = mix64(h ^ b)
    return h
