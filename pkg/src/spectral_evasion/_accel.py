"""Numba switch.

Set ``SPECTRAL_EVASION_NUMBA=0`` in the environment (before import) to force
the pure-numpy kernels. Numba is also skipped silently if it fails to import.
"""
import os

_FLAG = os.environ.get("SPECTRAL_EVASION_NUMBA", "1").strip().lower()

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _FLAG not in ("0", "false", "no", "off")


def njit(func):
    """``numba.njit(cache=True)`` when numba is available, else identity."""
    if not HAS_NUMBA:
        return func
    return numba.njit(cache=True)(func)


def backend():
    return "numba" if USE_NUMBA else "numpy"
