"""Singular Spectrum Analysis: decomposition, selection and reconstruction.

The trajectory matrix ``X`` (L x K, ``X[i, j] = x[i + j]``) is factored through
the small L x L lag-covariance ``X X^T``. Each elementary series is the
anti-diagonal average of ``sigma_i u_i v_i^T``, so the series sum to ``x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip, clamp
from .kernels import diagonal_average

DEFAULT_WINDOW = 50
NULL_RATIO = 1e-12


def default_window(n):
    return min(DEFAULT_WINDOW, n // 2)


@dataclass(frozen=True, eq=False)
class SsaDecomposition:
    window_length: int
    singular_values: np.ndarray
    components: np.ndarray  # (d, N)

    @property
    def rank(self):
        return self.singular_values.size

    @property
    def length(self):
        return self.components.shape[1]


def trajectory_matrix(x, L):
    x = np.asarray(x, dtype=np.float64)
    K = x.size - L + 1
    return np.lib.stride_tricks.sliding_window_view(x, K)[:L].copy()


def ssa_decompose(samples, L=None) -> SsaDecomposition:
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("ssa_decompose needs a non-empty 1-D sequence")
    n = x.size
    if L is None:
        L = default_window(n)
    if not 2 <= L <= n // 2:
        raise ValueError(f"window length must satisfy 2 <= L <= N/2 (N={n}), got {L}")

    X = trajectory_matrix(x, L)
    _, U = np.linalg.eigh(X @ X.T)
    U = U[:, ::-1]
    # right factors scaled by sigma: w_i = X^T u_i = sigma_i v_i
    W = (X.T @ U).T
    # norms of w_i are more accurate than sqrt(eigenvalue) for small sigma
    sigma = np.linalg.norm(W, axis=1)
    order = np.argsort(-sigma, kind="stable")
    sigma, U, W = sigma[order], U[:, order], W[order]

    null = sigma <= NULL_RATIO * sigma[0]
    W[null] = 0.0
    sigma[null] = 0.0
    components = diagonal_average(U.T, W)
    return SsaDecomposition(L, sigma, components)


def ssa_reconstruct(decomp: SsaDecomposition, keep) -> np.ndarray:
    """Sum of the elementary series whose 1-based indices are in ``keep``."""
    idx = sorted(set(int(k) for k in keep))
    if idx and (idx[0] < 1 or idx[-1] > decomp.rank):
        raise IndexError(f"component indices must lie in 1..{decomp.rank}")
    if not idx:
        return np.zeros(decomp.length)
    return decomp.components[np.asarray(idx) - 1].sum(axis=0)


def perturb_ssa(clip: AudioClip, t: float, L=None) -> AudioClip:
    """Drop components with ``sigma_i < t * sigma_1`` and resynthesize."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {t}")
    decomp = ssa_decompose(clip.samples, L)
    top = decomp.singular_values[0]
    if top == 0.0:
        return clip.with_samples(np.zeros(len(clip)))
    keep = np.flatnonzero(decomp.singular_values >= t * top) + 1
    return clip.with_samples(clamp(ssa_reconstruct(decomp, keep)))


class SsaLadder:
    """Reconstructions from the ``r`` strongest SSA components."""

    def __init__(self, samples, L=None):
        self.decomposition = ssa_decompose(samples, L)
        comps = self.decomposition.components
        self._partial = np.vstack([np.zeros(comps.shape[1]), np.cumsum(comps, axis=0)])
        self.size = self.decomposition.rank

    def reconstruct(self, r):
        if not 0 <= r <= self.size:
            raise ValueError(f"retained count {r} outside [0, {self.size}]")
        return self._partial[r].copy()

    def threshold_for(self, r):
        sv = self.decomposition.singular_values
        if r >= self.size or sv[0] == 0.0:
            return 0.0
        return float(sv[r] / sv[0])
