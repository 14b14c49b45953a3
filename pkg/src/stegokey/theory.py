"""Closed-form bounds for stego-key recovery in the binary/Hamming model.

All entropies are in bits. ``UNBOUNDED`` is returned where a bound diverges.
"""
import math
from dataclasses import dataclass

UNBOUNDED = math.inf
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class TheoryParams:
    """Per-object sizes and rates for the spurious-key and unicity bounds.

    N is the number of signs (pixels) per object, H_K the key entropy and
    H_M the message entropy per object. D is the Hamming distortion level.
    """

    N: int
    H_K: float
    H_M: float
    D: float
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.H_K < 0:
            raise ValueError(f"H_K must be >= 0, got {self.H_K}")
        if self.D < 0:
            raise ValueError(f"D must be >= 0, got {self.D}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")

    @property
    def R_m(self):
        return self.H_M / self.N

    @property
    def R_k(self):
        return self.H_K / self.N

    @property
    def slack(self):
        """C(D) - R_m + epsilon, in bits/sign."""
        return hiding_capacity(self.D) - self.R_m + self.epsilon

    @classmethod
    def for_lsb(cls, rate, key_bits, pixels, epsilon=DEFAULT_EPSILON):
        """LSB embedding at rate r: R_m = r, distortion r/2."""
        return cls(N=pixels, H_K=key_bits, H_M=rate * pixels, D=rate / 2, epsilon=epsilon)


def binary_entropy(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def hiding_capacity(D):
    """Capacity of a Bernoulli(1/2) cover under Hamming distortion D."""
    if D < 0:
        raise ValueError(f"distortion must be >= 0, got {D}")
    if D > 0.5:
        return 1.0
    return binary_entropy(D)


def hiding_redundancy(r):
    """H(r/2) - r: capacity left unused by LSB embedding at rate r."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"embedding rate out of range: {r}")
    return binary_entropy(r / 2) - r


def spurious_key_bound(params, n):
    """Lower bound on the expected number of spurious keys after n objects.

    Negative values mean the bound guarantees nothing; they are reported as 0.
    """
    if n < 1:
        raise ValueError(f"object count must be >= 1, got {n}")
    exponent = n * params.N * params.slack
    return max(0.0, 2.0 ** (params.H_K - exponent) - 1.0)


def unicity_lower_bound(params):
    """R_k / (C(D) - R_m + eps); ``UNBOUNDED`` when the denominator is <= 0."""
    denom = params.slack
    if denom <= 0:
        return UNBOUNDED
    return params.R_k / denom


def format_bound(value):
    return "unbounded" if math.isinf(value) else f"{value:.6g}"
