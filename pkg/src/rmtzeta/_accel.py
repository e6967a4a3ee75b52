"""Switch between numba-compiled hot loops and their pure-numpy twins.

Set ``RMTZETA_DISABLE_NUMBA=1`` in the environment to force the numpy path.
The flag is read once, at import time.
"""
import os

_FLAG = os.environ.get("RMTZETA_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(fn):
    """``numba.njit(cache=True)`` when numba is installed, identity otherwise."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


def pick(fast, slow):
    return fast if USE_NUMBA else slow
