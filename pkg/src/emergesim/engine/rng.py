"""Deterministic random source.

The generator is xoshiro256** (Blackman & Vigna, 2018) seeded through
splitmix64, implemented on Python integers so the output stream is identical
on every platform.  The numba ant kernel carries a bit-identical copy of the
same arithmetic; ``tests/test_rng.py`` checks the two against each other.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
ALGORITHM = "xoshiro256starstar/splitmix64-seeded"


def splitmix64(x: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns ``(new_state, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class RngStream:
    """Seeded 64-bit stream with period 2**256 - 1."""

    __slots__ = ("seed", "_s")

    def __init__(self, seed: int = 0):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        sm = seed
        state = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            state.append(out)
        self._s = state

    @classmethod
    def from_state(cls, state) -> "RngStream":
        rng = cls.__new__(cls)
        rng.seed = None
        rng.setstate(state)
        return rng

    def getstate(self) -> tuple[int, int, int, int]:
        return tuple(self._s)

    def setstate(self, state) -> None:
        state = [int(v) & MASK64 for v in state]
        if len(state) != 4 or not any(state):
            raise ValueError("xoshiro256** state must be four words, not all zero")
        self._s = state

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)


def uniform_index(rng: RngStream, n: int) -> int:
    """Unbiased integer in ``[0, n)``.

    Draws the top ``bit_length(n - 1)`` bits and rejects values >= n, so the
    expected number of draws is below 2.  ``n == 1`` consumes nothing.
    """
    if n < 1:
        raise ValueError("empty choice set")
    if n == 1:
        return 0
    shift = 64 - (n - 1).bit_length()
    while True:
        r = rng.next_u64() >> shift
        if r < n:
            return r


def random_permutation(rng: RngStream, n: int) -> list[int]:
    """Fisher-Yates shuffle of ``range(n)`` (Durstenfeld, high index first)."""
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = uniform_index(rng, i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def sample_without_replacement(rng: RngStream, n: int, k: int) -> list[int]:
    """First ``k`` entries of a partial Fisher-Yates shuffle of ``range(n)``."""
    if not 0 <= k <= n:
        raise ValueError(f"cannot sample {k} of {n}")
    pool = list(range(n))
    for i in range(k):
        j = i + uniform_index(rng, n - i)
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]
