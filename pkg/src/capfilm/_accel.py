"""Numba dispatch layer.

Hot kernels in this package come in two flavours: a numba ``@njit`` build and a
pure-numpy build.  The numpy path is selected when the environment variable
``CAPFILM_PURE_NUMPY`` is set to a truthy value, or automatically when numba is
not importable.  ``benchmarks/bench_kernels.py`` times both paths.
"""

from __future__ import annotations

import os


def _env_pure_numpy() -> bool:
    val = os.environ.get("CAPFILM_PURE_NUMPY", "")
    return val.strip().lower() not in ("", "0", "false", "no")


def _have_numba() -> bool:
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()
USE_NUMBA = HAVE_NUMBA and not _env_pure_numpy()

if HAVE_NUMBA:
    from numba import njit
else:  # no-op decorator so kernel modules stay importable

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap


def pick(numba_impl, numpy_impl):
    """Return the active implementation for a kernel pair."""
    return numba_impl if USE_NUMBA else numpy_impl
