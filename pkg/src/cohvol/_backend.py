"""Selects numba or the pure-numpy fallback for the hot kernels.

Set ``COHVOL_DISABLE_NUMBA=1`` to force the numpy path (useful for debugging
and for checking that both paths agree). ``COHVOL_NUM_THREADS`` caps the
numba thread pool.
"""
import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

NUMBA_ENABLED = numba is not None and (
    os.environ.get("COHVOL_DISABLE_NUMBA", "").strip().lower() in _FALSY
)


def njit(*args, **kwargs):
    """``numba.njit`` when enabled, otherwise the identity decorator."""
    if NUMBA_ENABLED:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


if NUMBA_ENABLED:
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    prange = numba.prange
    _threads = os.environ.get("COHVOL_NUM_THREADS")
    if _threads:
        numba.set_num_threads(max(1, min(int(_threads), numba.config.NUMBA_NUM_THREADS)))
else:
    prange = range
