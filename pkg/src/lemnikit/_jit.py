"""Numba switch.

Set ``LEMNIKIT_NUMBA=0`` to run every kernel through its pure numpy/Python
path. The compiled and fallback versions are both importable regardless of
the flag so they can be benchmarked side by side.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("LEMNIKIT_NUMBA", "1").lower() not in ("0", "false", "no", "off")


def njit(fn):
    """Compile ``fn`` in nopython mode, or return None when numba is missing."""
    if not HAVE_NUMBA:
        return None
    return numba.njit(cache=True, nogil=True)(fn)


def pick(compiled, fallback):
    return compiled if (USE_NUMBA and compiled is not None) else fallback
