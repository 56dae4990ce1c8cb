"""Optional numba acceleration with a pure-numpy fallback.

The hot numeric kernels (see kernels.py) exist in two variants: a numba
``@njit`` build and a vectorised numpy build.  Selection order:

* ``KPZRG_DISABLE_NUMBA=1`` in the environment forces the numpy path;
* otherwise numba is used when importable, numpy when not.

``benchmarks/bench_accel.py`` times the two paths against each other.
"""

import os

DISABLE = os.environ.get("KPZRG_DISABLE_NUMBA", "") == "1"

try:
    if DISABLE:
        raise ImportError
    from numba import njit as _njit  # noqa: F401

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def _njit(*args, **kwargs):
        # identity decorator; tolerate both @njit and @njit(...)
        if args and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap

USE_NUMBA = HAS_NUMBA and not DISABLE


def njit(*args, **kwargs):
    """@njit when acceleration is active, identity decorator otherwise."""
    return _njit(*args, **kwargs)
