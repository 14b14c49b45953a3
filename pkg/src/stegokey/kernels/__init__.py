"""Hot loops: keyed path generation and per-key exceedance counting.

Two interchangeable backends implement the same functions:

* ``jit``   -- numba ``@njit(nogil=True)``, used by default.
* ``numpy`` -- vectorised across a batch of keys, no compiler needed.

Set ``STEGOKEY_DISABLE_JIT=1`` to force the numpy path (it is also used when
numba cannot be imported). Both release control to other Python threads
(numba via ``nogil``, numpy inside its ufuncs), so callers parallelise over
key chunks with a thread pool.

Functions
---------
walk_path(kind, seed, length, eligible, count) -> int64[count]
    First ``count`` indices of the keyed partial Fisher-Yates walk over
    ``range(eligible)``.
count_exceed(kind, exceed, seeds, lengths, n) -> int64[len(seeds)]
    For each key, how many of the first ``n`` walk indices hit a 1 in
    ``exceed`` (a uint8 mask over the eligible range).
"""
import importlib
import os

import numpy as np

from . import _numpy

_disabled = os.environ.get("STEGOKEY_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes")


def _load_jit():
    try:
        return importlib.import_module(f"{__name__}._jit")
    except ImportError:  # pragma: no cover - numba missing
        return None


_jit = None if _disabled else _load_jit()

BACKEND = "jit" if _jit is not None else "numpy"
_impl = _jit if _jit is not None else _numpy


def backend_module(name):
    if name == "numpy":
        return _numpy
    if name == "jit":
        return importlib.import_module(f"{__name__}._jit")
    raise ValueError(f"unknown backend {name!r}")


def walk_path(kind, seed, length, eligible, count):
    return _impl.walk_path(int(kind), int(seed), int(length), int(eligible), int(count))


def count_exceed(kind, exceed, seeds, lengths, n):
    exceed = np.ascontiguousarray(exceed, dtype=np.uint8)
    seeds = np.ascontiguousarray(seeds, dtype=np.int64)
    lengths = np.ascontiguousarray(lengths, dtype=np.int64)
    return _impl.count_exceed(int(kind), exceed, seeds, lengths, int(n))
