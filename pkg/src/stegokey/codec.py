"""Keyed random-path LSB embedding for 8-bit grayscale images.

The stego key is a (16-bit seed, message length in bytes) pair. Both parts
seed the path generator, so a wrong length yields an unrelated path. The
first ``header_pixels`` pixels can be reserved; their LSBs then carry keyed
filler bits standing in for an encrypted header.

The seed/length mix (``seed XOR length * 0x9E3779B1``) is a stand-in: the
composition rule used by real Hide-and-Seek builds is not documented.
"""
from dataclasses import dataclass
from functools import total_ordering

import numpy as np

from . import kernels
from .image import GrayImage
from .prng import RNG_KINDS, rng_code

OPERATIONS = ("replace", "plus_minus_one")
SEED_LIMIT = 1 << 16

_FILLER_TAG = 0x48454144
_PM1_TAG = 0x504D31


class CapacityError(ValueError):
    def __init__(self, required, available):
        self.required = required
        self.available = available
        super().__init__(f"message needs {required} pixels but only {available} are available")


class MessageLengthError(ValueError):
    pass


@total_ordering
@dataclass(frozen=True)
class KeyCandidate:
    seed: int
    message_len_bytes: int

    def __post_init__(self):
        if not 0 <= self.seed < SEED_LIMIT:
            raise ValueError(f"seed must be a 16-bit unsigned integer, got {self.seed}")
        if self.message_len_bytes < 1:
            raise ValueError(f"message length must be >= 1 byte, got {self.message_len_bytes}")

    @property
    def n_bits(self):
        return 8 * self.message_len_bytes

    def __lt__(self, other):
        return (self.seed, self.message_len_bytes) < (other.seed, other.message_len_bytes)

    def to_dict(self):
        return {"seed": self.seed, "message_len_bytes": self.message_len_bytes}


@dataclass(frozen=True)
class EmbedConfig:
    operation: str = "replace"
    reserve_header: bool = True
    header_pixels: int = 64
    rng_kind: str = "borland_lcg"

    def __post_init__(self):
        if self.operation not in OPERATIONS:
            raise ValueError(f"unknown operation {self.operation!r}; expected one of {OPERATIONS}")
        if self.rng_kind not in RNG_KINDS:
            raise ValueError(f"unknown rng kind {self.rng_kind!r}; expected one of {RNG_KINDS}")
        if self.header_pixels < 0:
            raise ValueError("header_pixels must be >= 0")

    @property
    def skip(self):
        """Number of leading pixels excluded from paths."""
        return self.header_pixels if self.reserve_header else 0

    def eligible(self, image_size):
        if self.skip >= image_size:
            raise ValueError(f"header of {self.skip} pixels does not fit an image of {image_size}")
        return image_size - self.skip


def keyed_path(key, config, image_size):
    """Pixel indices (row-major, absolute) that carry the message bits."""
    eligible = config.eligible(image_size)
    if key.n_bits > eligible:
        raise CapacityError(key.n_bits, eligible)
    rel = kernels.walk_path(rng_code(config.rng_kind), key.seed, key.message_len_bytes, eligible, key.n_bits)
    return rel + config.skip


def _keyed_stream(key, tag):
    return np.random.default_rng([key.seed, key.message_len_bytes, tag])


def header_filler(key, count):
    return _keyed_stream(key, _FILLER_TAG).integers(0, 2, size=count, dtype=np.uint8)


def as_bits(message):
    """Bits of a bytes object, MSB first within each byte."""
    return np.unpackbits(np.frombuffer(bytes(message), dtype=np.uint8))


def as_bytes(bits):
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def embed(cover, message, key, config=EmbedConfig()):
    bits = np.asarray(message, dtype=np.uint8).reshape(-1)
    if bits.size != key.n_bits:
        raise MessageLengthError(f"message has {bits.size} bits, key expects {key.n_bits}")
    if bits.size and bits.max() > 1:
        raise ValueError("message must be a 0/1 bit sequence")
    path = keyed_path(key, config, cover.size)
    out = cover.flat.copy()
    values = out[path]
    if config.operation == "replace":
        out[path] = (values & 0xFE) | bits
    else:
        change = (values & 1) != bits
        step = np.where(_keyed_stream(key, _PM1_TAG).integers(0, 2, size=bits.size) == 1, 1, -1)
        moved = values.astype(np.int16) + step
        # saturating pixels move inward so the parity still flips
        moved[moved < 0] = 1
        moved[moved > 255] = 254
        out[path] = np.where(change, moved, values).astype(np.uint8)
    if config.reserve_header and config.header_pixels:
        h = config.header_pixels
        out[:h] = (out[:h] & 0xFE) | header_filler(key, h)
    return GrayImage(out.reshape(cover.pixels.shape))


def extract(stego, key, config=EmbedConfig()):
    path = keyed_path(key, config, stego.size)
    return stego.flat[path] & 1


def hamming_distortion(cover, stego, skip=0):
    """Fraction of pixels that differ, ignoring the first ``skip`` pixels."""
    if cover.pixels.shape != stego.pixels.shape:
        raise ValueError(f"dimension mismatch: {cover.pixels.shape} vs {stego.pixels.shape}")
    a = cover.flat[skip:]
    b = stego.flat[skip:]
    return float(np.count_nonzero(a != b)) / a.size
