"""Numba switch.

Set ``RANKBOUND_DISABLE_NUMBA=1`` to run every kernel as plain Python on
numpy arrays. The flag is read once, at import time.
"""

import os

_FLAG = os.environ.get("RANKBOUND_DISABLE_NUMBA", "").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

USE_NUMBA = _numba is not None and _FLAG not in ("1", "true", "yes", "on")


def jit(fn):
    """Compile ``fn`` in nopython mode when numba is enabled."""
    if USE_NUMBA:
        return _numba.njit(cache=True)(fn)
    return fn


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
