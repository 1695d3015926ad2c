"""Kernel backend selection.

Hot loops live in ``itbcodes.kernels`` in two flavours: numba ``@njit``
kernels and a pure-numpy fallback. ``ITBCODES_BACKEND`` picks one at import
time (``numba`` by default, ``numpy`` to force the fallback). If numba cannot
be imported the fallback is used silently.

``ITBCODES_THREADS`` caps the worker pool used by the chunked drivers.
"""

from __future__ import annotations

import os

_requested = os.environ.get("ITBCODES_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"ITBCODES_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    NUMBA_AVAILABLE = False

BACKEND = _requested if NUMBA_AVAILABLE else "numpy"


def default_threads() -> int:
    env = os.environ.get("ITBCODES_THREADS")
    if env:
        return max(1, int(env))
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:  # pragma: no cover - non-linux
        return max(1, os.cpu_count() or 1)
