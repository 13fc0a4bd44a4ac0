"""Selection of the numba or pure-numpy path for the hot kernels.

Set ``SPINDEC_JIT=0`` in the environment before import to force the
numpy implementations, e.g. on platforms without numba.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

_flag = os.environ.get("SPINDEC_JIT", "1").strip().lower()

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _flag not in ("0", "false", "off", "no")


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, fastmath=False)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
