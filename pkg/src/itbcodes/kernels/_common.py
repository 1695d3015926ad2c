"""Constants and small helpers shared by both kernel backends."""

from __future__ import annotations

import math

import numpy as np

# SplitMix64 constants (Steele, Lea & Flood); the generator state advances by
# GOLDEN and each output is the MIX1/MIX2 finalizer of the state.
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
HASH_SEED = 0x2545F4914F6CDD1D

# stream ids used to derive independent counter-based streams from one seed
STREAM_IS = 0x1F
STREAM_SHOTS = 0x2E

FOUND = 1
NOT_FOUND = 0

INV_2_53 = 1.0 / 9007199254740992.0


def words_for(nbits: int) -> int:
    return (nbits + 63) >> 6


def binom_table(n: int, k: int) -> np.ndarray:
    """C(i, j) for 0 <= i <= n, 0 <= j <= k as int64."""
    table = np.zeros((n + 1, k + 1), dtype=np.int64)
    for i in range(n + 1):
        for j in range(min(i, k) + 1):
            table[i, j] = math.comb(i, j)
    return table


def build_edges(h: np.ndarray):
    """Tanner-graph adjacency of a dense 0/1 matrix.

    Edges are numbered check-major (row by row, columns ascending). Returns
    ``(chk_ptr, edge_var, var_ptr, var_edges)`` where ``var_edges`` lists the
    edges of each variable in increasing edge order.
    """
    h = np.ascontiguousarray(h, dtype=np.uint8)
    rows, cols = np.nonzero(h)
    m, n = h.shape
    chk_ptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=m), out=chk_ptr[1:])
    edge_var = cols.astype(np.int64)
    var_edges = np.argsort(edge_var, kind="stable").astype(np.int64)
    var_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(edge_var, minlength=n), out=var_ptr[1:])
    return chk_ptr, edge_var, var_ptr, var_edges
