"""Backend selection for the numeric hot loops.

Kernels in this package come in two flavours: a numba @njit version and a
pure-numpy fallback. The active backend is chosen once from the environment
at import time (set VOXKIT_NO_NUMBA=1 to force numpy), and can be flipped at
runtime with set_backend() -- the benchmark harness uses that to time both
paths in one process.
"""

import os

_ENV_FLAG = "VOXKIT_NO_NUMBA"

_BACKEND = "numpy"


def _numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _init_backend():
    global _BACKEND
    if os.environ.get(_ENV_FLAG, "").strip() not in ("", "0"):
        _BACKEND = "numpy"
    elif _numba_available():
        _BACKEND = "numba"
    else:
        _BACKEND = "numpy"


def backend():
    return _BACKEND


def use_numba():
    return _BACKEND == "numba"


def set_backend(name):
    """Force 'numba' or 'numpy'. Raises if numba is requested but missing."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _numba_available():
        raise RuntimeError("numba backend requested but numba is not importable")
    _BACKEND = name


_init_backend()
