"""Backend selection for the hot kernels.

``JUMPINTERP_BACKEND=numpy`` forces the pure-numpy path; anything else (or
unset) uses numba when it is importable.
"""

import os

BACKEND_ENV = "JUMPINTERP_BACKEND"

try:
    import numba  # noqa: F401
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep in practice
    HAS_NUMBA = False


def requested_backend():
    value = os.environ.get(BACKEND_ENV, "").strip().lower()
    if value in ("numpy", "python", "off", "0"):
        return "numpy"
    return "numba" if HAS_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` if available, otherwise an identity decorator."""
    if HAS_NUMBA:
        from numba import njit as _njit
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn
