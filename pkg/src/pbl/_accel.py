"""Optional numba acceleration.

Set ``PBL_ACCEL=python`` to run every kernel as plain interpreted Python
(same source, no JIT). The default, ``auto``, uses numba when importable.
"""
import os

_MODE = os.environ.get("PBL_ACCEL", "auto").strip().lower()

if _MODE not in ("auto", "numba", "python"):
    raise ValueError(f"PBL_ACCEL must be auto, numba or python, got {_MODE!r}")

numba = None
if _MODE != "python":
    try:
        import numba
    except ImportError:
        if _MODE == "numba":
            raise

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _MODE != "python"


def jit(fn):
    """``numba.njit(cache=True)`` when enabled, identity otherwise.

    The undecorated function stays reachable as ``fn.py_func`` in both modes,
    which is what the benchmark and the object-dtype fallback call.
    """
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    fn.py_func = fn
    return fn
