"""Kernel dispatch: numba-compiled hot loops with a pure-Python fallback.

The fallback runs the exact same functions undecorated, so results are
bit-identical; it exists for environments without numba and for the
backend benchmark. Set SSLAB_NO_NUMBA=1 to force the fallback.
"""
from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


NUMBA_ENABLED = numba is not None and not _flag("SSLAB_NO_NUMBA")

BACKEND = "numba" if NUMBA_ENABLED else "numpy"


def jit(func):
    """Compile with numba when enabled, otherwise return the function as-is."""
    if NUMBA_ENABLED:
        return numba.njit(cache=True, nogil=True)(func)
    return func
