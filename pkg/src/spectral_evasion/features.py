"""MFCC front end: framing, mel filterbank, log energies, DCT-II."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct

from .audio_io import AudioClip


@dataclass(frozen=True)
class MfccConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    n_mels: int = 26
    n_coeffs: int = 13
    log_floor: float = 1e-10

    def __post_init__(self):
        if self.n_coeffs > self.n_mels:
            raise ValueError("n_coeffs must not exceed n_mels")
        if self.frame_ms < self.hop_ms or self.hop_ms <= 0:
            raise ValueError("need frame_ms >= hop_ms > 0")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    def frame_samples(self, sample_rate):
        return max(1, int(round(self.frame_ms * 1e-3 * sample_rate)))

    def hop_samples(self, sample_rate):
        return max(1, int(round(self.hop_ms * 1e-3 * sample_rate)))

    def n_fft(self, sample_rate):
        n = 1
        while n < self.frame_samples(sample_rate):
            n *= 2
        return n

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def frame_signal(clip: AudioClip, cfg: MfccConfig = MfccConfig()) -> np.ndarray:
    """Hamming-windowed frames, shape ``(n_frames, frame_samples)``."""
    size = cfg.frame_samples(clip.sample_rate)
    hop = cfg.hop_samples(clip.sample_rate)
    if len(clip) < size:
        raise ValueError(f"clip of {len(clip)} samples is shorter than one frame ({size})")
    frames = np.lib.stride_tricks.sliding_window_view(clip.samples, size)[::hop]
    return frames * np.hamming(size)


def mel_centers(cfg: MfccConfig, sample_rate) -> np.ndarray:
    """Filter edge/center frequencies in Hz (``n_mels + 2`` points)."""
    mels = np.linspace(0.0, hz_to_mel(sample_rate / 2.0), cfg.n_mels + 2)
    return mel_to_hz(mels)


def mel_filterbank(cfg: MfccConfig, sample_rate) -> np.ndarray:
    """Triangular filters, shape ``(n_mels, n_fft // 2 + 1)``."""
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    return _filterbank(cfg, int(sample_rate)).copy()


@lru_cache(maxsize=32)
def _filterbank(cfg, sample_rate):
    n_fft = cfg.n_fft(sample_rate)
    freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    pts = mel_centers(cfg, sample_rate)
    bank = np.zeros((cfg.n_mels, freqs.size))
    for m in range(cfg.n_mels):
        lo, mid, hi = pts[m], pts[m + 1], pts[m + 2]
        rise = (freqs - lo) / (mid - lo)
        fall = (hi - freqs) / (hi - mid)
        bank[m] = np.maximum(0.0, np.minimum(rise, fall))
        if not bank[m].any():
            # narrower than one bin: fall back to the nearest bin
            bank[m, np.argmin(np.abs(freqs - mid))] = 1.0
    return bank


def power_spectrum(frames, n_fft):
    return np.abs(np.fft.rfft(frames, n_fft)) ** 2


def mfcc(clip: AudioClip, cfg: MfccConfig = MfccConfig()) -> np.ndarray:
    """MFCC matrix of shape ``(n_frames, n_coeffs)``."""
    frames = frame_signal(clip, cfg)
    pspec = power_spectrum(frames, cfg.n_fft(clip.sample_rate))
    energies = pspec @ _filterbank(cfg, clip.sample_rate).T
    logs = np.log(np.maximum(energies, cfg.log_floor))
    return dct(logs, type=2, axis=1, norm="ortho")[:, :cfg.n_coeffs]


def mean_mfcc(clip: AudioClip, cfg: MfccConfig = MfccConfig()) -> np.ndarray:
    """Time-averaged MFCC vector."""
    return mfcc(clip, cfg).mean(axis=0)
