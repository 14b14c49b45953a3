import numpy as np
from numba import njit

_MASK32 = np.uint64(0xFFFFFFFF)
_BORLAND_MULT = np.uint64(0x015A4E35)
_LENGTH_MIX = np.uint64(0x9E3779B1)
_ONE = np.uint64(1)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S15 = np.uint64(15)
_S16 = np.uint64(16)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_S32 = np.uint64(32)
_LOW15 = np.uint64(0x7FFF)
_SMALL = np.uint64(0x8000)


@njit(cache=True, nogil=True, inline="always")
def _seed(kind, seed, length):
    s = np.uint64(seed)
    L = np.uint64(length)
    if kind == 0:
        return (s ^ (L * _LENGTH_MIX)) & _MASK32
    return (s << _S32) ^ L


@njit(cache=True, nogil=True, inline="always")
def _borland15(state):
    state = (state * _BORLAND_MULT + _ONE) & _MASK32
    return (state >> _S16) & _LOW15, state


@njit(cache=True, nogil=True, inline="always")
def _below(kind, state, bound):
    b = np.uint64(bound)
    if kind == 0:
        hi, state = _borland15(state)
        if b <= _SMALL:
            return np.int64(hi % b), state
        lo, state = _borland15(state)
        return np.int64(((hi << _S15) | lo) % b), state
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z = z ^ (z >> _S31)
    return np.int64(z % b), state


@njit(cache=True, nogil=True)
def walk_path(kind, seed, length, eligible, count):
    perm = np.arange(eligible).astype(np.int32)
    out = np.empty(count, np.int64)
    state = _seed(kind, seed, length)
    for i in range(count):
        v, state = _below(kind, state, eligible - i)
        j = i + v
        x = perm[j]
        perm[j] = perm[i]
        perm[i] = x
        out[i] = x
    return out


@njit(cache=True, nogil=True)
def count_exceed(kind, exceed, seeds, lengths, n):
    m = exceed.shape[0]
    perm = np.arange(m).astype(np.int32)
    js = np.empty(n, np.int64)
    out = np.empty(seeds.shape[0], np.int64)
    for k in range(seeds.shape[0]):
        state = _seed(kind, seeds[k], lengths[k])
        t = 0
        for i in range(n):
            v, state = _below(kind, state, m - i)
            j = i + v
            js[i] = j
            x = perm[j]
            perm[j] = perm[i]
            perm[i] = x
            t += exceed[x]
        # undo the swaps so perm is the identity again for the next key
        for i in range(n - 1, -1, -1):
            j = js[i]
            x = perm[j]
            perm[j] = perm[i]
            perm[i] = x
        out[k] = t
    return out
