"""Synthetic corpora for exercising the mock oracles.

Keywords share one loud harmonic "carrier" and differ only in a pair of weak
cue partials, so class identity lives in low-intensity components. Speakers
come in two flavours: separated by pitch band (easy to tell apart), or sharing
a voice and differing only in a faint breath-noise band.
"""
from __future__ import annotations

import numpy as np

from .audio_io import AudioClip, PhonemeSegment

SAMPLE_RATE = 8000

KEYWORDS = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"]
BACKGROUND = "_background"
# two cue partials per keyword (Hz)
KEYWORD_CUES = [(1000.0 + 280.0 * k, 1140.0 + 280.0 * ((3 * k + 5) % 10)) for k in range(10)]

CARRIER_F0 = 150.0
CARRIER_LEVEL = 0.4
CARRIER_HARMONICS = 4


def _carrier(t, rng, f0=CARRIER_F0, harmonics=CARRIER_HARMONICS, level=CARRIER_LEVEL,
             jitter=0.02):
    f0 = f0 * (1.0 + jitter * rng.uniform(-1, 1))
    x = np.zeros(t.size)
    for h in range(1, harmonics + 1):
        x += (level / h) * np.sin(2 * np.pi * h * f0 * t + rng.uniform(0, 2 * np.pi))
    return x


def keyword_clip(k, duration=0.25, rng=None, cue_level=0.05, noise=1e-4,
                 sample_rate=SAMPLE_RATE, cue_jitter=0.005):
    """Keyword ``k`` (index into :data:`KEYWORDS`); ``k=None`` gives carrier only."""
    rng = np.random.default_rng(rng)
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    x = _carrier(t, rng)
    if k is not None:
        for fc in KEYWORD_CUES[k]:
            fc *= 1.0 + cue_jitter * rng.uniform(-1, 1)
            amp = cue_level * rng.uniform(0.8, 1.2)
            x += amp * np.sin(2 * np.pi * fc * t + rng.uniform(0, 2 * np.pi))
    x += noise * rng.standard_normal(t.size)
    return AudioClip(np.clip(x, -1.0, 1.0), sample_rate)


def keyword_corpus(per_class=20, n_classes=10, duration=0.25, seed=0, background=True, **kw):
    """``[(clip, label), ...]``; with ``background`` an extra carrier-only class."""
    rng = np.random.default_rng(seed)
    corpus = [(keyword_clip(k, duration, rng, **kw), KEYWORDS[k])
              for k in range(n_classes) for _ in range(per_class)]
    if background:
        corpus += [(keyword_clip(None, duration, rng, **kw), BACKGROUND)
                   for _ in range(per_class)]
    return corpus


def pitch_speaker_corpus(per_speaker=10, duration=0.3, seed=0, noise=2e-3):
    """Two speakers in distinct pitch bands (about 110 Hz and 240 Hz)."""
    rng = np.random.default_rng(seed)
    t = np.arange(int(round(duration * SAMPLE_RATE))) / SAMPLE_RATE
    corpus = []
    for name, f0 in (("spk_low", 110.0), ("spk_high", 240.0)):
        for _ in range(per_speaker):
            x = _carrier(t, rng, f0=f0, harmonics=6, jitter=0.05)
            x += noise * rng.standard_normal(t.size)
            corpus.append((AudioClip(np.clip(x, -1, 1), SAMPLE_RATE), name))
    return corpus


BREATHY = "breathy"
CLEAR = "clear"
BREATH_BAND = (1200.0, 3600.0)


def _band_noise(n, band, level, rng, sample_rate=SAMPLE_RATE):
    spec = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    spec[(freqs < band[0]) | (freqs > band[1])] = 0.0
    x = np.fft.irfft(spec, n)
    return level * x / np.sqrt(np.mean(x ** 2))


def breath_speaker_clip(speaker, rng=None, silence=0.02, vowel=0.1, breath_level=0.01,
                        floor=1e-3):
    """``silence | vowel | silence`` utterance and its three segments.

    Both speakers share the voiced carrier; the breathy one adds faint
    band-limited noise under the vowel. The vowel is the dominant-energy
    segment (index 1).
    """
    if speaker not in (BREATHY, CLEAR):
        raise ValueError(f"unknown speaker {speaker!r}")
    rng = np.random.default_rng(rng)
    n_sil = int(round(silence * SAMPLE_RATE))
    n_vow = int(round(vowel * SAMPLE_RATE))
    t = np.arange(n_vow) / SAMPLE_RATE
    v = _carrier(t, rng, jitter=0.0)
    if speaker == BREATHY:
        v += _band_noise(n_vow, BREATH_BAND, breath_level, rng)
    x = np.concatenate([np.zeros(n_sil), v, np.zeros(n_sil)])
    x += floor * rng.standard_normal(x.size)
    segments = [PhonemeSegment(0, n_sil, "h#"),
                PhonemeSegment(n_sil, n_sil + n_vow, "aa"),
                PhonemeSegment(n_sil + n_vow, x.size, "h#")]
    return AudioClip(np.clip(x, -1, 1), SAMPLE_RATE), segments


def breath_speaker_corpus(per_speaker=10, seed=0, **kw):
    rng = np.random.default_rng(seed)
    return [(breath_speaker_clip(name, rng, **kw)[0], name)
            for name in (BREATHY, CLEAR) for _ in range(per_speaker)]


def two_tone_corpus(per_class=20, duration=0.25, seed=0, noise=1e-3):
    """200 Hz versus 2 kHz tones with small noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(int(round(duration * SAMPLE_RATE))) / SAMPLE_RATE
    corpus = []
    for label, f in (("low", 200.0), ("high", 2000.0)):
        for _ in range(per_class):
            x = 0.5 * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
            x += noise * rng.standard_normal(t.size)
            corpus.append((AudioClip(x, SAMPLE_RATE), label))
    return corpus


def tone(freq, duration, sample_rate=SAMPLE_RATE, amplitude=1.0, phase=0.0):
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    return amplitude * np.sin(2 * np.pi * freq * t + phase)
