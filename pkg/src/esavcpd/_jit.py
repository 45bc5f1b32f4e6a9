"""Backend selection for the numeric kernels.

Kernels are written once as plain Python on scalar components.  When numba
is importable and ``ESAVCPD_DISABLE_NUMBA`` is unset (or ``0``), they are
compiled with ``numba.njit``; otherwise the decorator is the identity and
the same source runs on the interpreter with numpy.
"""
import os

_flag = os.environ.get("ESAVCPD_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    from numba import njit as _numba_njit
    USE_NUMBA = True
except ImportError:
    USE_NUMBA = False

BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func=None, **kwargs):
    """``numba.njit`` with caching on, or a no-op when numba is off."""
    if not USE_NUMBA:
        if func is None:
            return lambda f: f
        return func
    kwargs.setdefault("cache", True)
    if func is None:
        return _numba_njit(**kwargs)
    return _numba_njit(**kwargs)(func)
