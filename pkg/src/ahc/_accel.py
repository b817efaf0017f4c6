"""JIT switch for the hot kernels.

Set ``AHC_DISABLE_NUMBA=1`` to force the pure-numpy path (also used when
numba is not importable). The flag is read once, at import time.
"""

import os

_flag = os.environ.get("AHC_DISABLE_NUMBA", "").strip().lower()
DISABLE_NUMBA = _flag not in ("", "0", "false", "no")

try:
    if DISABLE_NUMBA:
        raise ImportError
    from numba import njit as _njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    _njit = None

NUMBA_OPTS = {"cache": True, "nogil": True}


def njit(func):
    """``numba.njit`` with the package options, or the identity when disabled."""
    if HAS_NUMBA:
        return _njit(**NUMBA_OPTS)(func)
    return func


def backend() -> str:
    return "numba" if HAS_NUMBA else "numpy"
