"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names (``diagonal_average``, ``levenshtein``) are bound at import
time according to :data:`spectral_evasion._accel.USE_NUMBA`. Both flavours stay
importable under their suffixed names so tests and benchmarks can compare them.
"""
import numpy as np

from ._accel import USE_NUMBA, njit


# --------------------------------------------------------------------------
# Hankelization of rank-1 terms
# --------------------------------------------------------------------------

@njit
def _diagonal_average_numba(left, right):
    d, L = left.shape
    K = right.shape[1]
    n = L + K - 1
    m = min(L, K)
    out = np.zeros((d, n))
    for c in range(d):
        lc = left[c]
        rc = right[c]
        for i in range(L):
            a = lc[i]
            if a == 0.0:
                continue
            for j in range(K):
                out[c, i + j] += a * rc[j]
        for t in range(n):
            out[c, t] /= min(t + 1, n - t, m)
    return out


def _diagonal_average_numpy(left, right):
    d, L = left.shape
    K = right.shape[1]
    n = L + K - 1
    counts = np.minimum(np.minimum(np.arange(1, n + 1), np.arange(n, 0, -1)), min(L, K))
    out = np.empty((d, n))
    for c in range(d):
        out[c] = np.convolve(left[c], right[c]) / counts
    return out


# --------------------------------------------------------------------------
# Levenshtein distance over integer-coded tokens
# --------------------------------------------------------------------------

@njit
def _levenshtein_numba(a, b):
    m = a.shape[0]
    n = b.shape[0]
    prev = np.arange(n + 1)
    cur = np.empty(n + 1, dtype=prev.dtype)
    for i in range(1, m + 1):
        cur[0] = i
        ai = a[i - 1]
        for j in range(1, n + 1):
            cost = 0 if ai == b[j - 1] else 1
            best = prev[j - 1] + cost
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur[j] = best
        prev, cur = cur, prev
    return prev[n]


def _levenshtein_numpy(a, b):
    m = a.shape[0]
    n = b.shape[0]
    idx = np.arange(n + 1)
    prev = idx.copy()
    for i in range(1, m + 1):
        tmp = np.empty(n + 1, dtype=np.int64)
        tmp[0] = i
        tmp[1:] = np.minimum(prev[1:] + 1, prev[:-1] + (b != a[i - 1]))
        # insertions chain left to right: cur[j] = min_k<=j tmp[k] + (j - k)
        prev = np.minimum.accumulate(tmp - idx) + idx
    return int(prev[n])


def _as_codes(a, b):
    vocab = {}
    ca = np.array([vocab.setdefault(t, len(vocab)) for t in a], dtype=np.int64)
    cb = np.array([vocab.setdefault(t, len(vocab)) for t in b], dtype=np.int64)
    return ca, cb


if USE_NUMBA:
    _diagonal_average_impl = _diagonal_average_numba
    _levenshtein_impl = _levenshtein_numba
else:
    _diagonal_average_impl = _diagonal_average_numpy
    _levenshtein_impl = _levenshtein_numpy


def diagonal_average(left, right):
    """Anti-diagonal means of ``outer(left[c], right[c])`` for every row ``c``.

    ``left`` is ``(d, L)`` and ``right`` is ``(d, K)``; the result is
    ``(d, L + K - 1)``.
    """
    left = np.ascontiguousarray(left, dtype=np.float64)
    right = np.ascontiguousarray(right, dtype=np.float64)
    return _diagonal_average_impl(left, right)


def levenshtein(a, b):
    """Edit distance between two token sequences (unit costs)."""
    ca, cb = _as_codes(list(a), list(b))
    return int(_levenshtein_impl(ca, cb))
