"""Numba switch.

Set ``FTSPAN_NUMBA=0`` to force the pure-numpy kernels (useful for debugging
and for the benchmark that compares both paths).
"""
from __future__ import annotations

import os

try:  # pragma: no cover - import guard
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

NUMBA_AVAILABLE = _numba is not None


def numba_enabled() -> bool:
    flag = os.environ.get("FTSPAN_NUMBA", "1").strip().lower()
    return NUMBA_AVAILABLE and flag not in ("0", "false", "no", "off")


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity otherwise."""
    if _numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)
