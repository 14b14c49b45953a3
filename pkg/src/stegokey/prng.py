"""Scalar reference generators for keyed embedding paths.

These are plain-integer implementations. The vectorised and compiled kernels
in :mod:`stegokey.kernels` must reproduce them draw for draw.
"""

MASK32 = 0xFFFFFFFF
MASK64 = 0xFFFFFFFFFFFFFFFF

BORLAND_MULT = 0x015A4E35
# odd constant used to fold the message length into the 32-bit LCG state
LENGTH_MIX = 0x9E3779B1

SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
SPLITMIX_M1 = 0xBF58476D1CE4E5B9
SPLITMIX_M2 = 0x94D049BB133111EB

RNG_KINDS = ("borland_lcg", "splitmix")


def rng_code(kind):
    """Integer code of an rng kind name, as used by the kernels."""
    try:
        return RNG_KINDS.index(kind)
    except ValueError:
        raise ValueError(f"unknown rng kind {kind!r}; expected one of {RNG_KINDS}") from None


class BorlandLCG:
    """Borland C ``rand()``: state = state * 0x015A4E35 + 1 (mod 2**32)."""

    def __init__(self, state):
        self.state = state & MASK32

    @classmethod
    def from_key(cls, seed, length_bytes):
        return cls(seed ^ (length_bytes * LENGTH_MIX))

    def next15(self):
        self.state = (self.state * BORLAND_MULT + 1) & MASK32
        return (self.state >> 16) & 0x7FFF

    def below(self, bound):
        # a single 15-bit draw cannot cover bounds above 2**15, so two are joined
        if bound <= 0x8000:
            return self.next15() % bound
        hi = self.next15()
        lo = self.next15()
        return ((hi << 15) | lo) % bound


class SplitMix64:
    def __init__(self, state):
        self.state = state & MASK64

    @classmethod
    def from_key(cls, seed, length_bytes):
        return cls((seed << 32) ^ length_bytes)

    def next64(self):
        self.state = (self.state + SPLITMIX_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * SPLITMIX_M1) & MASK64
        z = ((z ^ (z >> 27)) * SPLITMIX_M2) & MASK64
        return z ^ (z >> 31)

    def below(self, bound):
        return self.next64() % bound


def make_rng(kind, seed, length_bytes):
    if kind == "borland_lcg":
        return BorlandLCG.from_key(seed, length_bytes)
    if kind == "splitmix":
        return SplitMix64.from_key(seed, length_bytes)
    raise ValueError(f"unknown rng kind {kind!r}; expected one of {RNG_KINDS}")


def reference_walk(kind, seed, length_bytes, eligible, count):
    """Partial Fisher-Yates walk over ``range(eligible)``; returns ``count`` indices.

    Slow, dictionary-backed, and independent of the kernels. Used as the test
    oracle for both kernel backends.
    """
    rng = make_rng(kind, seed, length_bytes)
    swapped = {}
    out = []
    for i in range(count):
        j = i + rng.below(eligible - i)
        vi = swapped.get(i, i)
        vj = swapped.get(j, j)
        swapped[i] = vj
        swapped[j] = vi
        out.append(vj)
    return out
