import math

import numpy as np
import pytest

from spectral_evasion import synth
from spectral_evasion.attack import (bisect_retained, discard_weakest, impulse_attack,
                                     make_ladder, phoneme_attack, threshold_attack,
                                     white_noise_baseline, word_attack)
from spectral_evasion.analysis import snr_db
from spectral_evasion.audio_io import PhonemeSegment
from spectral_evasion.oracles import CallableOracle, RetryableOracleError, normalize
from conftest import make_clip


@pytest.mark.parametrize("size", [1, 2, 3, 10, 129])
def test_bisection_finds_boundary_of_monotone_predicate(size):
    for boundary in range(-1, size):
        best, probes = bisect_retained(lambda r: r <= boundary, size, 100)
        assert best == (boundary if boundary >= 0 else None)
        assert len(probes) <= math.ceil(math.log2(size + 1))


def test_bisection_respects_probe_cap():
    best, probes = bisect_retained(lambda r: r < 700, 1000, 3)
    assert [r for r, _ in probes] == [499, 749, 624] and best == 624


def test_word_attack_flips_keyword(keyword_oracle):
    clip = synth.keyword_clip(4, rng=11)
    for method in ("dft", "ssa"):
        res = word_attack(clip, keyword_oracle.with_budget(15), method)
        assert res.success and res.queries_used <= 15
        assert res.attack_label != res.baseline_label
        assert normalize(keyword_oracle.classify(res.perturbed)) == res.attack_label.text
        assert 0.0 <= res.final_threshold <= 1.0


def test_word_attack_unflippable_oracle():
    oracle = CallableOracle(lambda c: "same", budget=15)
    res = word_attack(make_clip(np.sin(np.arange(64))), oracle)
    assert not res.success and res.retained_components == 0
    # 33 units: probes 16, 7, 3, 1, 0 after the baseline
    assert res.queries_used == 6 and [r for r, _ in res.probes] == [16, 7, 3, 1, 0]


def test_word_attack_budget_validation():
    with pytest.raises(ValueError):
        word_attack(make_clip([0.1, 0.2]), CallableOracle(lambda c: "x"), budget=1)


def test_word_attack_surfaces_oracle_failure():
    calls = []

    def fn(clip):
        calls.append(1)
        if len(calls) > 2:
            raise RetryableOracleError("down")
        return "a" if len(calls) == 1 else "b"

    res = word_attack(make_clip(np.sin(np.arange(64))), CallableOracle(fn))
    assert res.error == "down" and res.success and res.queries_used == 2


def test_threshold_attack_two_queries(keyword_oracle):
    oracle = keyword_oracle.with_budget(2)
    res = threshold_attack(synth.keyword_clip(2, rng=3), oracle, "dft", 0.2)
    assert res.queries_used == 2 and res.final_threshold == 0.2


@pytest.mark.parametrize("method", ["dft", "ssa"])
@pytest.mark.parametrize("factor,n", [(0.5, 80), (0.5, 81), (0.25, 100), (1.0, 40), (0.0, 40)])
def test_discard_weakest_counts(rng, method, factor, n):
    x = rng.standard_normal(n)
    rec, kept, d, _ = discard_weakest(x, method, factor)
    assert d == make_ladder(x, method, min(50, n // 2)).size
    assert kept == math.floor(d * (1 - factor))
    np.testing.assert_allclose(rec, make_ladder(x, method, min(50, n // 2)).reconstruct(kept))


def test_phoneme_attack_contract(rng):
    clip = make_clip(0.3 * rng.standard_normal(500))
    seg = PhonemeSegment(100, 300, "aa")
    for method in ("dft", "ssa"):
        oracle = CallableOracle(lambda c: "x", budget=2)
        res = phoneme_attack(clip, seg, oracle, method)
        assert res.queries_used == 2 and not res.success
        out = res.perturbed.samples
        assert out[:100].tobytes() == clip.samples[:100].tobytes()
        assert out[300:].tobytes() == clip.samples[300:].tobytes()
        assert res.retained_components == res.total_components // 2


def test_phoneme_attack_flips_breath_speaker(speaker_oracle):
    rng = np.random.default_rng(5)
    flips = 0
    for _ in range(20):
        clip, segs = synth.breath_speaker_clip(synth.BREATHY, rng)
        res = phoneme_attack(clip, segs[1], speaker_oracle.with_budget(2), "ssa")
        flips += res.success
    assert flips >= 1


def test_impulse_attack():
    clip = make_clip([0.1, -0.6, 0.2, 0.3, 0.0])
    out = impulse_attack(clip, PhonemeSegment(1, 4, "t"), 0.5).samples
    np.testing.assert_array_equal(out, [0.1, 0.6, 0.6, 0.3, 0.0])
    out = impulse_attack(clip, PhonemeSegment(1, 4, "t")).samples
    np.testing.assert_array_equal(out, [0.1, 0.6, 0.6, 0.6, 0.0])
    with pytest.raises(ValueError):
        impulse_attack(clip, PhonemeSegment(1, 4, "t"), 0.0)


def test_white_noise_hits_snr(rng):
    clip = make_clip(0.2 * np.sin(np.arange(4000) / 5))
    for snr in (0.0, 10.0, 30.0):
        out = white_noise_baseline(clip, snr, seed=3)
        assert abs(snr_db(clip.samples, out.samples) - snr) < 1e-9
    assert white_noise_baseline(clip, math.inf) is clip
    a, b = white_noise_baseline(clip, 5.0, 1), white_noise_baseline(clip, 5.0, 1)
    assert a.samples.tobytes() == b.samples.tobytes()
    for bad in (math.nan, -math.inf):
        with pytest.raises(ValueError):
            white_noise_baseline(clip, bad)
    with pytest.raises(ValueError):
        white_noise_baseline(make_clip(np.zeros(5)), 10.0)
