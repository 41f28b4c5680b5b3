import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_evasion import _accel
from spectral_evasion.kernels import (_diagonal_average_numba, _diagonal_average_numpy,
                                      _levenshtein_numba, _levenshtein_numpy, _as_codes,
                                      diagonal_average, levenshtein)


def brute_levenshtein(a, b):
    d = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(len(a) + 1):
        for j in range(len(b) + 1):
            if i == 0 or j == 0:
                d[i][j] = i + j
            else:
                d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1,
                              d[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return d[-1][-1]


def brute_diagonal_average(u, w):
    E = np.outer(u, w)
    L = len(u)
    return np.array([np.mean(E[::-1].diagonal(k - L + 1)) for k in range(L + len(w) - 1)])


@pytest.mark.parametrize("impl", [_diagonal_average_numba, _diagonal_average_numpy])
@pytest.mark.parametrize("L,K", [(1, 1), (2, 5), (5, 2), (7, 7), (10, 31)])
def test_diagonal_average_flavours(rng, impl, L, K):
    left, right = rng.standard_normal((3, L)), rng.standard_normal((3, K))
    out = impl(left, right)
    for c in range(3):
        np.testing.assert_allclose(out[c], brute_diagonal_average(left[c], right[c]), atol=1e-12)


@given(st.lists(st.sampled_from("abc"), max_size=7), st.lists(st.sampled_from("abc"), max_size=7))
@settings(max_examples=200, deadline=None)
def test_levenshtein_flavours_agree(a, b):
    ca, cb = _as_codes(a, b)
    expected = brute_levenshtein(a, b)
    assert _levenshtein_numba(ca, cb) == expected
    assert _levenshtein_numpy(ca, cb) == expected
    assert levenshtein(a, b) == expected


def test_levenshtein_classic():
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein([], ["x"]) == 1
    assert levenshtein(["the", "cat"], ["the", "cat"]) == 0


def test_public_diagonal_average_accepts_lists():
    assert diagonal_average([[1.0, 2.0]], [[3.0]]).shape == (1, 2)


def test_backend_flag_selects_numpy():
    code = "from spectral_evasion import _accel; print(_accel.backend())"
    env = dict(os.environ, SPECTRAL_EVASION_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"
    assert _accel.backend() == ("numba" if _accel.USE_NUMBA else "numpy")
