"""Optional numba acceleration.

Set ``CBPNET_DISABLE_NUMBA=1`` before import to run every hot loop as plain
Python over numpy arrays. Both paths consume the same ``numpy.random.Generator``
draws in the same order, so results agree bit-for-bit.
"""
import os

NUMBA_DISABLED = os.environ.get("CBPNET_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

if NUMBA_DISABLED:
    HAVE_NUMBA = False
else:
    try:
        import numba  # noqa: F401
        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover
        HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available and enabled, identity decorator otherwise."""
    if HAVE_NUMBA:
        from numba import njit as _njit

        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend() -> str:
    return "numba" if HAVE_NUMBA else "python"
