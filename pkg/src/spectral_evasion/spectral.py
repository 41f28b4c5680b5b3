"""DFT decomposition, relative magnitude thresholding and reconstruction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip, clamp


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex DFT coefficients ``f_0 .. f_{N-1}`` of a length-N series."""

    coefficients: np.ndarray

    @property
    def origin_length(self):
        return self.coefficients.size

    @property
    def magnitudes(self):
        return np.abs(self.coefficients)


def forward_dft(samples) -> Spectrum:
    """``f_k = sum_n x_n exp(-2j pi k n / N)`` for ``k = 0..N-1`` (unnormalized)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("forward_dft needs a non-empty 1-D sequence")
    return Spectrum(np.fft.fft(x))


def inverse_dft(spectrum: Spectrum) -> np.ndarray:
    """Invert :func:`forward_dft`; the imaginary residue is discarded."""
    return np.fft.ifft(spectrum.coefficients).real


def pair_units(n):
    """Group bin indices into conjugate units.

    Returns ``(first, mirror)`` arrays: unit ``u`` owns bins ``first[u]`` and
    ``mirror[u]`` (equal for DC and, when ``n`` is even, Nyquist). There are
    ``n // 2 + 1`` units.
    """
    first = np.arange(n // 2 + 1)
    mirror = (n - first) % n
    return first, mirror


def unit_magnitudes(spectrum: Spectrum) -> np.ndarray:
    """Per-unit magnitude; the larger of the two mirrored bins."""
    mag = spectrum.magnitudes
    first, mirror = pair_units(spectrum.origin_length)
    return np.maximum(mag[first], mag[mirror])


def _zero_units(coefficients, units):
    out = coefficients.copy()
    first, mirror = pair_units(out.size)
    out[first[units]] = 0.0
    out[mirror[units]] = 0.0
    return out


def threshold_spectrum(spectrum: Spectrum, t: float) -> Spectrum:
    """Zero every conjugate unit whose magnitude is below ``t * max|f_k|``.

    Ties are kept, so ``t = 0`` is an exact identity.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {t}")
    mags = unit_magnitudes(spectrum)
    peak = mags.max()
    if peak == 0.0:
        return spectrum
    drop = np.flatnonzero(mags < t * peak)
    return Spectrum(_zero_units(spectrum.coefficients, drop))


def rank_units(spectrum: Spectrum) -> np.ndarray:
    """Unit indices from strongest to weakest (stable on ties)."""
    return np.argsort(-unit_magnitudes(spectrum), kind="stable")


def retain_strongest(spectrum: Spectrum, r: int, order=None) -> Spectrum:
    """Keep only the ``r`` strongest conjugate units."""
    if order is None:
        order = rank_units(spectrum)
    if not 0 <= r <= order.size:
        raise ValueError(f"retained count {r} outside [0, {order.size}]")
    return Spectrum(_zero_units(spectrum.coefficients, order[r:]))


def perturb_dft(clip: AudioClip, t: float) -> AudioClip:
    """Threshold the whole-clip spectrum at fraction ``t`` and resynthesize."""
    spec = threshold_spectrum(forward_dft(clip.samples), t)
    return clip.with_samples(clamp(inverse_dft(spec)))


class DftLadder:
    """Rank-ordered DFT reconstructions of one series.

    ``reconstruct(r)`` returns the series rebuilt from its ``r`` strongest
    conjugate units; ``threshold_for(r)`` gives the equivalent relative
    discard threshold.
    """

    def __init__(self, samples):
        self.spectrum = forward_dft(samples)
        self.order = rank_units(self.spectrum)
        self.unit_mags = unit_magnitudes(self.spectrum)
        self.size = self.order.size

    def reconstruct(self, r):
        return inverse_dft(retain_strongest(self.spectrum, r, self.order))

    def threshold_for(self, r):
        peak = self.unit_mags.max()
        if r >= self.size or peak == 0.0:
            return 0.0
        return float(self.unit_mags[self.order[r]] / peak)
