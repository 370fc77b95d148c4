"""Kernel acceleration switch.

Hot loops (triangle rasterisation, Dijkstra, carving) are compiled with
numba when available. Setting ``CHANNELFORGE_NO_NUMBA=1`` (or numba being
absent) selects the pure-numpy/python fallbacks instead; results are
identical either way, only speed differs.
"""

import os

NUMBA_DISABLED = os.environ.get("CHANNELFORGE_NO_NUMBA", "").strip() in ("1", "true", "yes")

if not NUMBA_DISABLED:
    try:
        import numba  # noqa: F401
        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False
else:
    HAS_NUMBA = False


def njit(*args, **kwargs):
    """numba.njit when enabled, identity decorator otherwise."""
    if HAS_NUMBA:
        from numba import njit as _njit
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f
