"""JIT toggle for the hot kernels.

Kernels in this package are written as plain loops over numpy arrays so the
same source runs either compiled by numba or as ordinary Python. Set
``RAYCUT_DISABLE_NUMBA=1`` to force the interpreted fallback (or it engages
automatically when numba is not importable). ``benchmarks/bench_kernels.py``
times both paths.
"""

import os

USING_NUMBA = False

if os.environ.get("RAYCUT_DISABLE_NUMBA", "0") != "1":
    try:
        from numba import njit as _njit
        USING_NUMBA = True
    except ImportError:
        pass

if USING_NUMBA:
    def njit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        if func is None:
            return _njit(**kwargs)
        return _njit(**kwargs)(func)
else:
    def njit(func=None, **kwargs):
        if func is None:
            return lambda f: f
        return func
