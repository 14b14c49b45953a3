"""Correlation attack: recover the stego key from the stego image alone.

Step 0 estimates the rate and noise variance and plans (n, T). Step 1 counts,
for every key, how many of its first n path residuals exceed A = 0.5 and keeps
the keys reaching T. One survivor ends the search. Otherwise Step 3 rescans
with the whole message path and keeps the keys with the largest count; a
unique maximum is the answer, a tie is reported as ambiguous.
"""
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .codec import CapacityError, EmbedConfig, KeyCandidate
from .noise import ModelMismatchWarning, compute_noise, estimate_rate, estimate_sigma2
from .prng import rng_code
from .stats import InfeasiblePlanError, build_mixture, plan_attack

UNIQUE = "unique_key"
AMBIGUOUS = "ambiguous"
FAILED = "failed"
THRESHOLD_STAGE = "threshold_stage"
MAX_STAGE = "max_stage"

CHUNK = 512
MAX_REPORTED_SURVIVORS = 1024


class GridKeySpace:
    """All seeds below 2**seed_bits for each candidate length.

    Ordered by length, then seed, both ascending.
    """

    def __init__(self, seed_bits, lengths):
        if not 1 <= seed_bits <= 16:
            raise ValueError(f"seed_bits must lie in [1, 16], got {seed_bits}")
        self.seed_bits = seed_bits
        self.lengths = np.array(sorted(set(int(x) for x in lengths)), dtype=np.int64)
        if self.lengths.size == 0 or self.lengths[0] < 1:
            raise ValueError("need at least one positive candidate length")
        self.seed_count = 1 << seed_bits

    def __len__(self):
        return self.seed_count * self.lengths.size

    @property
    def min_length(self):
        return int(self.lengths[0])

    def arrays(self, start, stop):
        idx = np.arange(start, stop, dtype=np.int64)
        return idx % self.seed_count, self.lengths[idx // self.seed_count]

    def key(self, i):
        return KeyCandidate(int(i % self.seed_count), int(self.lengths[i // self.seed_count]))

    def describe(self):
        return {
            "kind": "grid",
            "seed_bits": self.seed_bits,
            "min_length": int(self.lengths[0]),
            "max_length": int(self.lengths[-1]),
            "lengths": int(self.lengths.size),
            "size": len(self),
        }


class ExplicitKeySpace:
    def __init__(self, keys):
        keys = sorted(set(keys), key=lambda k: (k.message_len_bytes, k.seed))
        if not keys:
            raise ValueError("keyspace is empty")
        self.seeds = np.array([k.seed for k in keys], dtype=np.int64)
        self.lengths = np.array([k.message_len_bytes for k in keys], dtype=np.int64)

    def __len__(self):
        return self.seeds.size

    @property
    def min_length(self):
        return int(self.lengths.min())

    def arrays(self, start, stop):
        return self.seeds[start:stop], self.lengths[start:stop]

    def key(self, i):
        return KeyCandidate(int(self.seeds[i]), int(self.lengths[i]))

    def describe(self):
        return {"kind": "explicit", "size": len(self)}


def as_keyspace(keys):
    if isinstance(keys, (GridKeySpace, ExplicitKeySpace)):
        return keys
    return ExplicitKeySpace(list(keys))


def length_window(rate, eligible, width=0.02, max_len=None):
    """Candidate byte lengths for rates within ``rate +- width``."""
    cap = eligible // 8 if max_len is None else min(max_len, eligible // 8)
    lo = max(1, math.floor((rate - width) * eligible / 8))
    hi = min(cap, math.ceil((rate + width) * eligible / 8))
    if hi < lo:
        raise ValueError(f"no admissible lengths for rate {rate:.4g}")
    return range(lo, hi + 1)


@dataclass(frozen=True)
class DecisionStatistic:
    key: KeyCandidate
    t_k: int
    n: int


def score_key(noise, key, n, A=0.5, config=EmbedConfig()):
    """Exceedance count over the first n residuals on the key's path."""
    eligible = noise.values.size - config.skip
    if key.n_bits > eligible:
        raise CapacityError(key.n_bits, eligible)
    if not 1 <= n <= key.n_bits:
        raise ValueError(f"n = {n} outside [1, {key.n_bits}] for this key")
    mask = _mask(noise, A, config)
    t = kernels.count_exceed(rng_code(config.rng_kind), mask, [key.seed], [key.message_len_bytes], n)
    return DecisionStatistic(key, int(t[0]), n)


def _mask(noise, A, config):
    if noise.skip != config.skip:
        raise ValueError(f"noise field skips {noise.skip} pixels but the config reserves {config.skip}")
    return noise.exceed_mask(A)


def _score_chunk(kind, mask, keyspace, n, start, stop):
    seeds, lengths = keyspace.arrays(start, stop)
    ok = (8 * lengths <= mask.size) & (n <= 8 * lengths)
    t = np.full(seeds.size, -1, dtype=np.int64)
    if ok.any():
        t[ok] = kernels.count_exceed(kind, mask, seeds[ok], lengths[ok], n)
    return t


def _scan(kind, mask, keyspace, n, threads, reduce):
    bounds = [(s, min(s + CHUNK, len(keyspace))) for s in range(0, len(keyspace), CHUNK)]

    def work(b):
        return b[0], reduce(_score_chunk(kind, mask, keyspace, n, *b))

    if threads <= 1:
        return [work(b) for b in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, bounds))


def threshold_survivors(kind, mask, keyspace, n, T, threads=1):
    """Indices of keys with count >= T (Step 1 set B)."""
    parts = _scan(kind, mask, keyspace, n, threads, lambda t: np.flatnonzero(t >= T))
    return np.concatenate([start + idx for start, idx in parts]) if parts else np.empty(0, np.int64)


def max_survivors(kind, mask, keyspace, n, threads=1):
    """(T_max, indices attaining it) over the keyspace (Step 3 set D)."""

    def local(t):
        m = int(t.max())
        return m, np.flatnonzero(t == m)

    parts = _scan(kind, mask, keyspace, n, threads, local)
    best = max(m for _, (m, _) in parts)
    idx = [start + i for start, (m, i) in parts if m == best]
    return best, np.concatenate(idx)


@dataclass
class AttackResult:
    outcome: str
    stage: Optional[str]
    recovered: Optional[KeyCandidate]
    best_guess: Optional[KeyCandidate]
    survivors: list
    survivor_count: int
    stats: dict
    mixture: Optional[dict] = None
    plan: Optional[dict] = None
    estimates: dict = field(default_factory=dict)
    keyspace: dict = field(default_factory=dict)
    diagnostic: Optional[str] = None
    timing: dict = field(default_factory=dict)

    @property
    def success(self):
        return self.outcome == UNIQUE

    def to_dict(self, timing=False):
        d = {
            "outcome": self.outcome,
            "stage": self.stage,
            "recovered": self.recovered.to_dict() if self.recovered else None,
            "best_guess": self.best_guess.to_dict() if self.best_guess else None,
            "survivor_count": self.survivor_count,
            "survivors": [k.to_dict() for k in self.survivors],
            "stats": self.stats,
            "estimates": self.estimates,
            "mixture": self.mixture,
            "plan": self.plan,
            "keyspace": self.keyspace,
            "diagnostic": self.diagnostic,
        }
        if timing:
            d["timing"] = self.timing
        return d


def _keys(keyspace, idx):
    keys = sorted(keyspace.key(int(i)) for i in idx[:MAX_REPORTED_SURVIVORS])
    return keys


def correlation_attack(
    stego,
    keyspace,
    config=EmbedConfig(),
    *,
    rate=None,
    sigma=None,
    p_m=0.01,
    A=0.5,
    threads=1,
    rate_estimator=estimate_rate,
    radius=1,
    noise=None,
):
    """Search ``keyspace`` for the key that embedded into ``stego``.

    ``rate`` and ``sigma`` override the estimates from the image. ``noise``
    may be passed to reuse a residual field computed earlier.
    """
    t0 = time.perf_counter()
    keyspace = as_keyspace(keyspace)
    kind = rng_code(config.rng_kind)
    if noise is None:
        noise = compute_noise(stego, radius, config.skip)
    mask = _mask(noise, A, config)

    estimates = {}
    if rate is None:
        est = rate_estimator(noise)
        rate = est.rate
        estimates.update(r_source="estimated", r_half_width=est.half_width)
    else:
        estimates["r_source"] = "override"
    estimates["r"] = rate
    if sigma is None:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ModelMismatchWarning)
            sigma2 = estimate_sigma2(noise, rate)
        estimates.update(sigma2=sigma2, sigma2_clamped=bool(caught), sigma_source="estimated")
        sigma = math.sqrt(sigma2)
    else:
        estimates.update(sigma2=sigma * sigma, sigma2_clamped=False, sigma_source="override")
    estimates["sigma"] = sigma

    model = build_mixture(rate, sigma, A)
    base = dict(
        stats={"keys_tested": 0},
        mixture=model.to_dict(),
        estimates=estimates,
        keyspace=keyspace.describe(),
    )
    try:
        plan = plan_attack(model, max(2, len(keyspace)), p_m)
    except InfeasiblePlanError as exc:
        return AttackResult(FAILED, None, None, None, [], 0, diagnostic=str(exc), **base)
    base["plan"] = plan.to_dict()

    full_n = 8 * keyspace.min_length
    tested = 0
    stats = {"n_planned": plan.n, "T": plan.T}

    def finish(outcome, stage, idx, n_used, **extra):
        survivors = _keys(keyspace, idx)
        elapsed = time.perf_counter() - t0
        recovered = survivors[0] if outcome == UNIQUE else None
        best = min(survivors) if survivors else None
        base["stats"] = dict(stats, n_used=n_used, keys_tested=tested, **extra)
        base["timing"] = {"elapsed": elapsed, "keys_per_second": tested / elapsed if elapsed > 0 else 0.0}
        return AttackResult(outcome, stage, recovered, best, survivors, int(len(idx)), **base)

    if plan.n <= full_n:
        B = threshold_survivors(kind, mask, keyspace, plan.n, plan.T, threads)
        tested += len(keyspace)
        stats["threshold_survivors"] = int(B.size)
        if B.size == 1:
            return finish(UNIQUE, THRESHOLD_STAGE, B, plan.n)

    t_max, D = max_survivors(kind, mask, keyspace, full_n, threads)
    tested += len(keyspace)
    if t_max < 0:
        base["diagnostic"] = "no key in the keyspace fits the image"
        return finish(FAILED, MAX_STAGE, np.empty(0, np.int64), full_n, t_max=None)
    outcome = UNIQUE if D.size == 1 else AMBIGUOUS
    return finish(outcome, MAX_STAGE, D, full_n, t_max=t_max)
