import numpy as np

_MASK32 = np.uint64(0xFFFFFFFF)
_BORLAND_MULT = np.uint64(0x015A4E35)
_LENGTH_MIX = np.uint64(0x9E3779B1)
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# keys advanced in lockstep per call; bounds the (batch, eligible) scratch table
BATCH = 64


def _seed(kind, seeds, lengths):
    s = np.asarray(seeds, dtype=np.uint64)
    L = np.asarray(lengths, dtype=np.uint64)
    if kind == 0:
        return (s ^ (L * _LENGTH_MIX)) & _MASK32
    return (s << np.uint64(32)) ^ L


def _borland15(state):
    state = (state * _BORLAND_MULT + np.uint64(1)) & _MASK32
    return (state >> np.uint64(16)) & np.uint64(0x7FFF), state


def _below(kind, state, bound):
    b = np.uint64(bound)
    if kind == 0:
        hi, state = _borland15(state)
        if bound <= 0x8000:
            return (hi % b).astype(np.int64), state
        lo, state = _borland15(state)
        return (((hi << np.uint64(15)) | lo) % b).astype(np.int64), state
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    z = z ^ (z >> np.uint64(31))
    return (z % b).astype(np.int64), state


def _walk_batch(kind, seeds, lengths, eligible, count, exceed=None):
    """Advance a batch of keys together; return (indices, counts)."""
    b = len(seeds)
    perm = np.tile(np.arange(eligible, dtype=np.int32), (b, 1))
    rows = np.arange(b)
    state = _seed(kind, seeds, lengths)
    picked = np.empty((b, count), np.int64) if exceed is None else None
    totals = np.zeros(b, np.int64)
    for i in range(count):
        v, state = _below(kind, state, eligible - i)
        j = i + v
        x = perm[rows, j]
        perm[rows, j] = perm[:, i]
        perm[:, i] = x
        if exceed is None:
            picked[:, i] = x
        else:
            totals += exceed[x]
    return picked, totals


def walk_path(kind, seed, length, eligible, count):
    picked, _ = _walk_batch(kind, [seed], [length], eligible, count)
    return picked[0]


def count_exceed(kind, exceed, seeds, lengths, n):
    seeds = np.asarray(seeds, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    out = np.empty(len(seeds), np.int64)
    for start in range(0, len(seeds), BATCH):
        stop = start + BATCH
        _, out[start:stop] = _walk_batch(
            kind, seeds[start:stop], lengths[start:stop], exceed.shape[0], n, exceed
        )
    return out
