"""Parity-signed residuals of a stego image and the moments derived from them.

Each pixel is compared with the mean of its neighbourhood (centre excluded,
edges truncated). Odd pixels keep ``s - mean``, even pixels get
``mean - s``, so an LSB-replaced pixel is pushed up by one in either case.
Under embedding at rate r the residuals follow a two-component normal mixture
with means 0 and 1 and weights (1 - r/2, r/2).
"""
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

SIGMA2_FLOOR = 1e-6


class ModelMismatchWarning(UserWarning):
    """Second moment too small for the assumed embedding rate."""


def _window_sums(a, radius):
    """Sum of ``a`` over each (2r+1)^2 window, truncated at the borders."""
    h, w = a.shape
    k = 2 * radius + 1
    ii = np.zeros((h + k, w + k), dtype=a.dtype)
    ii[radius + 1 : radius + 1 + h, radius + 1 : radius + 1 + w] = a
    ii = ii.cumsum(0).cumsum(1)
    return ii[k:, k:] - ii[:-k, k:] - ii[k:, :-k] + ii[:-k, :-k]


def spatial_average_filter(image, radius=1):
    """Mean of each pixel's neighbourhood, excluding the pixel itself."""
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    h, w = image.pixels.shape
    k = 2 * radius + 1
    if h < k or w < k:
        raise ValueError(f"image {w}x{h} is smaller than the {k}x{k} filter window")
    px = image.pixels.astype(np.int64)
    sums = _window_sums(px, radius) - px
    counts = _window_sums(np.ones_like(px), radius) - 1
    return sums / counts


@dataclass(frozen=True, eq=False)
class NoiseField:
    """Residuals for every pixel, with moments over ``values[skip:]``."""

    values: np.ndarray
    width: int
    height: int
    skip: int = 0
    mean: float = field(init=False)
    second_moment: float = field(init=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.size != self.width * self.height:
            raise ValueError("residual count does not match image size")
        if not 0 <= self.skip < v.size:
            raise ValueError(f"skip {self.skip} out of range for {v.size} residuals")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        used = v[self.skip :]
        object.__setattr__(self, "mean", float(used.mean()))
        object.__setattr__(self, "second_moment", float(np.dot(used, used) / used.size))

    @property
    def used(self):
        return self.values[self.skip :]

    @property
    def count(self):
        return self.values.size - self.skip

    def exceed_mask(self, threshold=0.5):
        """uint8 mask of residuals strictly above ``threshold``, from ``skip`` on."""
        return (self.used > threshold).astype(np.uint8)


def compute_noise(stego, radius=1, skip_header=0):
    smooth = spatial_average_filter(stego, radius)
    s = stego.pixels.astype(np.float64)
    odd = (stego.pixels & 1).astype(bool)
    w = np.where(odd, s - smooth, smooth - s)
    return NoiseField(w, stego.width, stego.height, skip_header)


def estimate_sigma2(noise, r):
    """sigma^2 = a2 - r/2, floored at ``SIGMA2_FLOOR`` with a warning."""
    est = noise.second_moment - r / 2
    if est < SIGMA2_FLOOR:
        warnings.warn(
            f"second moment {noise.second_moment:.4g} < r/2 = {r / 2:.4g}; "
            f"clamping sigma^2 to {SIGMA2_FLOOR}",
            ModelMismatchWarning,
            stacklevel=2,
        )
        return SIGMA2_FLOOR
    return est


class RateEstimate(NamedTuple):
    rate: float
    half_width: float


RateEstimator = Callable[[NoiseField], RateEstimate]


def estimate_rate(noise, z=1.96):
    """Mixture-mean estimator: E[w] = r/2, so r = 2 * mean, clipped to [0, 1].

    ``half_width`` is z standard errors of the estimate.
    """
    used = noise.used
    se = float(used.std(ddof=1)) / math.sqrt(used.size) if used.size > 1 else math.inf
    rate = min(1.0, max(0.0, 2.0 * noise.mean))
    return RateEstimate(rate, 2.0 * z * se)


def summary(noise, rate=None):
    """Dict of the quantities the ``noise`` CLI writes to its sidecar."""
    r_hat = estimate_rate(noise)
    r = r_hat.rate if rate is None else rate
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ModelMismatchWarning)
        sigma2 = estimate_sigma2(noise, r)
    return {
        "N": noise.count,
        "width": noise.width,
        "height": noise.height,
        "skip": noise.skip,
        "mean": noise.mean,
        "a2": noise.second_moment,
        "sigma2_hat": sigma2,
        "r_hat": r_hat.rate,
        "r_half_width": r_hat.half_width,
    }
