import json

import numpy as np
import pytest

from stegokey import attack
from stegokey.attack import (
    AMBIGUOUS,
    FAILED,
    MAX_STAGE,
    THRESHOLD_STAGE,
    UNIQUE,
    ExplicitKeySpace,
    GridKeySpace,
    correlation_attack,
    length_window,
    score_key,
)
from stegokey.codec import CapacityError, EmbedConfig, KeyCandidate, embed
from stegokey.image import GrayImage
from stegokey.noise import NoiseField, compute_noise
from stegokey.stats import build_mixture, plan_attack


def make_stego(cover, L, seed, rng, config=EmbedConfig()):
    key = KeyCandidate(seed, L)
    return embed(cover, rng.integers(0, 2, 8 * L, dtype=np.uint8), key, config), key


def test_grid_keyspace_order():
    ks = GridKeySpace(2, [7, 5])
    assert [ks.key(i) for i in range(len(ks))] == [
        KeyCandidate(s, L) for L in (5, 7) for s in range(4)
    ]
    seeds, lengths = ks.arrays(3, 6)
    assert seeds.tolist() == [3, 0, 1] and lengths.tolist() == [5, 7, 7]


def test_length_window():
    w = length_window(0.3, 153536)
    assert w.start == int((0.28 * 153536) // 8)
    assert len(w) == pytest.approx(0.04 * 153536 / 8, abs=3)
    assert length_window(0.0, 1000).start == 1


def test_score_key_zero_field():
    f = NoiseField(np.zeros(1000), 100, 10, skip=64)
    s = score_key(f, KeyCandidate(1, 10), 80)
    assert s.t_k == 0


def test_score_key_errors():
    f = NoiseField(np.zeros(1000), 100, 10, skip=64)
    with pytest.raises(CapacityError):
        score_key(f, KeyCandidate(1, 200), 80)
    with pytest.raises(ValueError):
        score_key(f, KeyCandidate(1, 10), 81)
    with pytest.raises(ValueError):
        score_key(NoiseField(np.zeros(1000), 100, 10), KeyCandidate(1, 10), 8)


def test_score_statistics(cover, rng):
    L = 5760
    stego, key = make_stego(cover, L, 4321, rng)
    noise = compute_noise(stego, skip_header=64)
    r = 8 * L / (cover.size - 64)
    model = build_mixture(r, np.sqrt(noise.second_moment - r / 2))
    n = plan_attack(model, 4096).n
    sd0 = np.sqrt(model.p0 * (1 - model.p0) / n)
    sd1 = np.sqrt(model.p1 * (1 - model.p1) / n)
    assert abs(score_key(noise, key, n).t_k / n - model.p0) < 3 * sd0
    wrong = [score_key(noise, KeyCandidate(s, L), n).t_k / n for s in range(50)]
    assert abs(np.mean(wrong) - model.p1) < 3 * sd1


def test_single_key_space(cover, rng):
    stego, key = make_stego(cover, 3000, 9, rng)
    result = correlation_attack(stego, [key])
    assert result.outcome == UNIQUE and result.recovered == key


def test_recovers_key_threshold_stage(cover, rng):
    stego, key = make_stego(cover, 5760, 200, rng)
    result = correlation_attack(stego, GridKeySpace(9, [5760]), rate=8 * 5760 / (cover.size - 64))
    assert result.outcome == UNIQUE
    assert result.recovered == key
    assert result.stage == THRESHOLD_STAGE
    assert result.stats["n_used"] == result.plan["n"] <= 8 * 5760


def test_small_message_goes_to_max_stage(cover, rng):
    stego, key = make_stego(cover, 20, 17, rng)
    result = correlation_attack(stego, GridKeySpace(8, [20]), rate=160 / (cover.size - 64))
    assert result.plan["n"] > 160
    assert result.stage == MAX_STAGE
    assert result.stats["n_used"] == 160
    assert "threshold_survivors" not in result.stats


def test_estimated_rate_with_length_window(cover, rng):
    stego, key = make_stego(cover, 4000, 11, rng)
    noise = compute_noise(stego, skip_header=64)
    est = attack.estimate_rate(noise)
    window = length_window(est.rate, cover.size - 64)
    assert 4000 in window
    result = correlation_attack(stego, GridKeySpace(4, window))
    assert result.estimates["r_source"] == "estimated"
    assert result.recovered == key


def test_ties_are_ambiguous():
    flat = GrayImage(np.full((40, 40), 90, np.uint8))
    result = correlation_attack(flat, GridKeySpace(4, [20]), rate=0.3, sigma=1.0)
    assert result.outcome == AMBIGUOUS
    assert result.survivor_count == 16
    assert result.best_guess == KeyCandidate(0, 20)
    assert result.recovered is None


def test_infeasible_rate_fails(cover):
    result = correlation_attack(cover, GridKeySpace(4, [100]), rate=1.0, sigma=1.5)
    assert result.outcome == FAILED
    assert "infeasible" in result.diagnostic


def test_impossible_keys_are_rejected(cover, rng):
    stego, key = make_stego(cover, 200, 3, rng)
    too_long = KeyCandidate(3, cover.size)
    result = correlation_attack(stego, ExplicitKeySpace([key, too_long, KeyCandidate(4, 200)]), rate=0.01)
    assert result.recovered == key


def test_partition_and_thread_independence(cover, rng, monkeypatch):
    stego, _ = make_stego(cover, 3000, 77, rng)
    ref = correlation_attack(stego, GridKeySpace(8, [3000, 3001]), threads=1).to_dict()
    monkeypatch.setattr(attack, "CHUNK", 37)
    for threads in (1, 3, 8):
        got = correlation_attack(stego, GridKeySpace(8, [3000, 3001]), threads=threads).to_dict()
        assert json.dumps(got, sort_keys=True) == json.dumps(ref, sort_keys=True)


def test_report_json_without_timing(cover, rng):
    stego, _ = make_stego(cover, 500, 1, rng)
    result = correlation_attack(stego, GridKeySpace(4, [500]))
    d = result.to_dict()
    assert "timing" not in d
    assert "timing" in result.to_dict(timing=True)
    json.dumps(d)
