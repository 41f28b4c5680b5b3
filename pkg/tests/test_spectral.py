import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from spectral_evasion.spectral import (DftLadder, forward_dft, inverse_dft, pair_units,
                                       perturb_dft, rank_units, retain_strongest,
                                       threshold_spectrum, unit_magnitudes)
from conftest import make_clip


def naive_dft(x):
    n = len(x)
    k = np.arange(n)
    return np.array([np.sum(x * np.exp(-2j * np.pi * f * k / n)) for f in range(n)])


signals = st.integers(1, 64).flatmap(
    lambda n: arrays(np.float64, n, elements=st.floats(-1, 1, allow_nan=False)))


@pytest.mark.parametrize("n", [1, 2, 7, 8, 33, 64])
def test_forward_matches_direct_summation(rng, n):
    x = rng.uniform(-1, 1, n)
    np.testing.assert_allclose(forward_dft(x).coefficients, naive_dft(x), atol=1e-9, rtol=0)


@given(signals)
@settings(max_examples=60, deadline=None)
def test_round_trip(x):
    back = inverse_dft(forward_dft(x))
    assert np.linalg.norm(back - x) <= 1e-9 * max(np.linalg.norm(x), 1e-300) + 1e-12


@given(signals)
@settings(max_examples=60, deadline=None)
def test_parseval_and_symmetry(x):
    f = forward_dft(x).coefficients
    n = len(x)
    assert np.isclose(np.sum(x ** 2), np.sum(np.abs(f) ** 2) / n, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(f[(-np.arange(n)) % n], np.conj(f), atol=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3, 8, 9])
def test_pair_units_partition_bins(n):
    first, mirror = pair_units(n)
    assert len(first) == n // 2 + 1
    owned = sorted({int(b) for pair in zip(first, mirror) for b in pair})
    assert owned == list(range(n))


def test_threshold_zero_is_identity(rng):
    x = rng.standard_normal(50)
    spec = forward_dft(x)
    np.testing.assert_array_equal(threshold_spectrum(spec, 0.0).coefficients, spec.coefficients)


def test_threshold_one_keeps_only_peak_units():
    x = np.sin(2 * np.pi * 3 * np.arange(32) / 32) + 0.1 * np.cos(2 * np.pi * 7 * np.arange(32) / 32)
    out = inverse_dft(threshold_spectrum(forward_dft(x), 1.0))
    np.testing.assert_allclose(out, np.sin(2 * np.pi * 3 * np.arange(32) / 32), atol=1e-12)


def test_threshold_keeps_equal_magnitude_and_stays_real(rng):
    x = rng.standard_normal(31)
    spec = forward_dft(x)
    mags = unit_magnitudes(spec)
    t = float(np.sort(mags)[-5] / mags.max())
    kept = threshold_spectrum(spec, t)
    assert np.count_nonzero(unit_magnitudes(kept)) == 5
    f = kept.coefficients
    np.testing.assert_allclose(f[(-np.arange(31)) % 31], np.conj(f), atol=1e-12)


def test_threshold_rejects_out_of_range():
    spec = forward_dft(np.ones(4))
    for t in (-0.1, 1.5, float("nan")):
        with pytest.raises(ValueError):
            threshold_spectrum(spec, t)


def test_threshold_on_silence_is_unchanged():
    spec = forward_dft(np.zeros(16))
    assert not np.any(threshold_spectrum(spec, 0.5).coefficients)


@given(signals, st.floats(0, 1))
@settings(max_examples=50, deadline=None)
def test_higher_threshold_never_keeps_more(x, t):
    spec = forward_dft(x)
    a = np.count_nonzero(threshold_spectrum(spec, t).coefficients)
    b = np.count_nonzero(threshold_spectrum(spec, min(1.0, t + 0.1)).coefficients)
    assert b <= a


def test_ladder_matches_threshold_rule(rng):
    x = rng.standard_normal(40)
    ladder = DftLadder(x)
    assert ladder.size == 21
    np.testing.assert_allclose(ladder.reconstruct(ladder.size), x, atol=1e-12)
    assert not np.any(ladder.reconstruct(0))
    for r in (1, 5, 20):
        t = ladder.threshold_for(r)
        # units strictly above the threshold of the first discarded unit survive
        spec = threshold_spectrum(forward_dft(x), np.nextafter(t, 2.0))
        np.testing.assert_allclose(inverse_dft(spec), ladder.reconstruct(r), atol=1e-12)


def test_retain_strongest_order_is_stable():
    spec = forward_dft(np.zeros(8))
    assert list(rank_units(spec)) == [0, 1, 2, 3, 4]
    assert not np.any(retain_strongest(spec, 3).coefficients)


def test_perturb_dft_clamps_and_keeps_rate():
    clip = make_clip(np.r_[np.ones(10), -np.ones(10)], sr=16000)
    out = perturb_dft(clip, 0.3)
    assert out.sample_rate == 16000 and len(out) == 20
    assert np.max(np.abs(out.samples)) <= 1.0
