"""Numba switch.

Set ``CCCBVP_DISABLE_NUMBA=1`` to run every hot kernel through its pure-numpy
implementation. The flag is read once, at import time.
"""
import os

_FALSY = ("", "0", "false", "no", "off")

DISABLED = os.environ.get("CCCBVP_DISABLE_NUMBA", "0").strip().lower() not in _FALSY

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(func):
    """``numba.njit(cache=True)`` when numba is usable, otherwise the plain function."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)
