"""Gaussian tails, the accordant advantage, and key-test planning.

A key is tested by counting how many of its first n path residuals exceed a
threshold A. The correct key sees exceedances with probability p0, a wrong
key with p1 < p0. ``plan_attack`` picks n and the acceptance count T for a
target false-alarm and miss probability.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import erfc

_SQRT2 = math.sqrt(2.0)


class InfeasiblePlanError(ValueError):
    pass


def q_function(x):
    """Upper tail of the standard normal, P(Z > x). Accepts scalars or arrays."""
    out = 0.5 * erfc(np.asarray(x, dtype=np.float64) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def _upper_root(p):
    # Q is decreasing; bisect on [0, hi] for p <= 0.5
    lo, hi = 0.0, 1.0
    while q_function(hi) > p:
        hi *= 2.0
        if hi > 64:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if q_function(mid) > p:
            lo = mid
        else:
            hi = mid
    return lo if abs(q_function(lo) - p) <= abs(q_function(hi) - p) else hi


def inverse_q(p):
    """x with Q(x) = p, by bisection down to adjacent doubles."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -_upper_root(1.0 - p)
    return _upper_root(p)


@dataclass(frozen=True)
class MixtureModel:
    r: float
    sigma: float
    A: float
    alpha0: float
    alpha1: float
    p0: float
    p1: float
    delta_p: float

    @property
    def delta_alpha(self):
        return self.alpha1 - self.alpha0

    def to_dict(self):
        d = asdict(self)
        d["delta_alpha"] = self.delta_alpha
        return d


def build_mixture(r, sigma, A=0.5):
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"embedding rate out of range: {r}")
    alpha0 = q_function(A / sigma)
    alpha1 = q_function((A - 1.0) / sigma)
    p0 = 0.5 * (alpha0 + alpha1)
    p1 = (1.0 - r / 2) * alpha0 + (r / 2) * alpha1
    delta_p = 0.5 * (1.0 - r) * (alpha1 - alpha0)
    return MixtureModel(r, sigma, A, alpha0, alpha1, p0, p1, delta_p)


def delta_alpha_at_half(sigma):
    """Advantage gap at A = 1/2, where it is largest: 1 - 2Q(1/(2 sigma))."""
    return 1.0 - 2.0 * q_function(0.5 / sigma)


@dataclass(frozen=True)
class AttackPlan:
    keyspace_size: int
    p_f: float
    p_m: float
    w_f: float
    w_m: float
    n: int
    T: float
    n_star: float

    def to_dict(self):
        return asdict(self)


def _spread(model, w_f, w_m):
    return w_m * math.sqrt(model.p0 * (1 - model.p0)) + w_f * math.sqrt(model.p1 * (1 - model.p1))


def plan_attack(model, keyspace_size, p_m=0.01):
    """Sample count n (bits) and threshold T for a keyspace of the given size.

    The false-alarm rate is 1/keyspace_size, so on average fewer than one wrong
    key passes over a full search.
    """
    if not model.delta_p > 0:
        raise InfeasiblePlanError(
            f"accordant advantage is {model.delta_p:.3g} at r = {model.r:.4g}; "
            "the correct key cannot be told apart (attack infeasible at r = 1)"
        )
    if keyspace_size < 2:
        raise ValueError(f"keyspace must hold at least 2 keys, got {keyspace_size}")
    if not 0.0 < p_m < 0.5:
        raise ValueError(f"p_m must lie in (0, 0.5), got {p_m}")
    p_f = 1.0 / keyspace_size
    w_f = inverse_q(p_f)
    w_m = inverse_q(p_m)
    spread = _spread(model, w_f, w_m)
    n = max(1, math.ceil((spread / model.delta_p) ** 2))
    T = w_f * math.sqrt(n * model.p1 * (1 - model.p1)) + n * model.p1
    if model.r > 0:
        n_star = 4 * spread**2 / (model.r * ((1 - model.r) * model.delta_alpha) ** 2)
    else:
        n_star = math.inf
    return AttackPlan(keyspace_size, p_f, p_m, w_f, w_m, n, T, n_star)
