"""Kernel backend selection.

Hot loops are compiled with numba by default.  Setting the environment
variable ``DESSIN_NUMBA=0`` selects the pure-numpy/python fallback path
(useful for debugging and as a correctness reference; see
benchmarks/bench_backends.py for the speed comparison).
"""

import os

USE_NUMBA = os.environ.get("DESSIN_NUMBA", "1").lower() not in ("0", "false", "no")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap
