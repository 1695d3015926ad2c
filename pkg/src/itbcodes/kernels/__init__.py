"""Hot kernels, dispatched to numba or numpy according to ``ITBCODES_BACKEND``."""

from __future__ import annotations

import importlib

from .._backend import BACKEND, NUMBA_AVAILABLE
from ._common import FOUND, NOT_FOUND, binom_table, build_edges, words_for

_NAMES = (
    "rref_packed",
    "batch_pair_k",
    "canonical_keys",
    "random_is",
    "mitm_weight",
    "bp_min_sum",
    "osd",
    "simulate_shots",
    "uniforms",
)


def load(backend: str):
    """Import the kernel module for ``backend`` ('numba' or 'numpy')."""
    if backend == "numba":
        if not NUMBA_AVAILABLE:
            raise ImportError("numba backend requested but numba is not installed")
        return importlib.import_module("._numba_kernels", __name__)
    if backend == "numpy":
        return importlib.import_module("._numpy_kernels", __name__)
    raise ValueError(f"unknown backend {backend!r}")


_impl = load(BACKEND)
globals().update({name: getattr(_impl, name) for name in _NAMES})

__all__ = [
    "BACKEND",
    "FOUND",
    "NOT_FOUND",
    "binom_table",
    "build_edges",
    "load",
    "words_for",
    *_NAMES,
]
