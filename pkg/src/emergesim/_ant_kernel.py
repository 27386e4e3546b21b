"""numba port of the ant tick loop.

Must consume the random stream exactly like ``ants.ant_tick`` and
``engine.rng``; ``tests/test_ants.py`` compares both backends trace for trace.
"""

import numba
import numpy as np

_M = np.uint64(0xFFFFFFFFFFFFFFFF)


@numba.njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@numba.njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@numba.njit(cache=True)
def random01(s):
    return float(next_u64(s) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True)
def _bit_length(v):
    n = 0
    while v > 0:
        v >>= 1
        n += 1
    return n


@numba.njit(cache=True)
def uniform_index(s, n):
    if n == 1:
        return 0
    shift = np.uint64(64 - _bit_length(n - 1))
    while True:
        r = next_u64(s) >> shift
        if r < np.uint64(n):
            return np.int64(r)


@numba.njit(cache=True)
def run_ticks(items, ant_pos, carrying, mem, counts, ptr, state, nbr, nbr_count, n_ticks, k1, k2):
    n_ants = ant_pos.shape[0]
    n_types = mem.shape[1]
    T = mem.shape[2]
    perm = np.empty(n_ants, dtype=np.int64)
    for _ in range(n_ticks):
        for i in range(n_ants):
            perm[i] = i
        for i in range(n_ants - 1, 0, -1):
            j = uniform_index(state, i + 1)
            tmp = perm[i]
            perm[i] = perm[j]
            perm[j] = tmp
        for k in range(n_ants):
            a = perm[k]
            here = ant_pos[a]
            here = nbr[here, uniform_index(state, nbr_count[here])]
            ant_pos[a] = here
            item = items[here]
            slot = ptr[a]
            for t in range(n_types):
                bit = 1 if item == t + 1 else 0
                counts[a, t] += bit - mem[a, t, slot]
                mem[a, t, slot] = bit
            ptr[a] = (slot + 1) % T
            if carrying[a] == 0:
                if item != 0:
                    f = counts[a, item - 1] / T
                    r = k1 / (k1 + f)
                    if random01(state) < r * r:
                        carrying[a] = item
                        items[here] = 0
            elif item == 0:
                f = counts[a, carrying[a] - 1] / T
                r = f / (k2 + f)
                if random01(state) < r * r:
                    items[here] = carrying[a]
                    carrying[a] = 0
