"""Slow, independent reference implementations used to check the library.

Nothing here imports the package's linear algebra or kernels: ranks use
Python integers as bit rows, lifts are built from explicit Kronecker products
of cyclic shift matrices, and distances come from brute-force enumeration.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def gf2_rank(dense) -> int:
    rows = [int("".join(str(int(b)) for b in row), 2) if len(row) else 0 for row in np.asarray(dense)]
    rank = 0
    while rows:
        pivot = rows.pop()
        if pivot == 0:
            continue
        rank += 1
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
    return rank


def gf2_matmul(a, b):
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64)) % 2


def in_span(dense, v) -> bool:
    dense = np.asarray(dense)
    return gf2_rank(np.vstack([dense, v])) == gf2_rank(dense)


def shift(l: int) -> np.ndarray:
    """Cyclic shift S_l with S[i, (i + 1) mod l] = 1."""
    return np.roll(np.eye(l, dtype=np.int64), 1, axis=1)


def monomial_matrix(dims, a, b, c) -> np.ndarray:
    l1, l2, l3 = dims
    x = np.kron(np.kron(shift(l1), np.eye(l2, dtype=np.int64)), np.eye(l3, dtype=np.int64))
    y = np.kron(np.kron(np.eye(l1, dtype=np.int64), shift(l2)), np.eye(l3, dtype=np.int64))
    z = np.kron(np.kron(np.eye(l1, dtype=np.int64), np.eye(l2, dtype=np.int64)), shift(l3))
    out = np.eye(l1 * l2 * l3, dtype=np.int64)
    for m, e in ((x, a), (y, b), (z, c)):
        out = out @ np.linalg.matrix_power(m, e)
    return out % 2


def lift(dims, terms) -> np.ndarray:
    N = math.prod(dims)
    out = np.zeros((N, N), dtype=np.int64)
    for t in terms:
        out ^= monomial_matrix(dims, *t)
    return out


def brute_force_distance(hx, hz, sector: str) -> int | None:
    """Minimum weight of a vector in ker(opposing) outside rowspace(same)."""
    hx, hz = np.asarray(hx), np.asarray(hz)
    opp, same = (hz, hx) if sector == "X" else (hx, hz)
    n = hx.shape[1]
    for w in range(1, n + 1):
        for sup in itertools.combinations(range(n), w):
            v = np.zeros(n, dtype=np.int64)
            v[list(sup)] = 1
            if gf2_matmul(opp, v).any():
                continue
            if not in_span(same, v):
                return w
    return None


def depolarizing_exact_failure(code, p: float, decode_x, decode_z) -> float:
    """Exact failure probability by summing over all 4^n Pauli patterns.

    ``decode_x(syndrome)`` and ``decode_z(syndrome)`` return corrections; a
    pattern fails if either residual is a nontrivial logical, judged by rank.
    """
    hx, hz = code.hx.to_dense(), code.hz.to_dense()
    n = code.n
    total = 0.0
    for paulis in itertools.product(range(4), repeat=n):  # 0 I, 1 X, 2 Z, 3 Y
        ex = np.array([1 if q in (1, 3) else 0 for q in paulis], dtype=np.uint8)
        ez = np.array([1 if q in (2, 3) else 0 for q in paulis], dtype=np.uint8)
        nerr = sum(1 for q in paulis if q)
        prob = (p / 3) ** nerr * (1 - p) ** (n - nerr)
        fail = False
        for err, check, same, dec in ((ex, hz, hx, decode_x), (ez, hx, hz, decode_z)):
            syn = gf2_matmul(check, err).astype(np.uint8)
            corr = dec(syn) if syn.any() else np.zeros(n, dtype=np.uint8)
            resid = err ^ corr
            assert not gf2_matmul(check, resid).any()
            if resid.any() and not in_span(same, resid):
                fail = True
        if fail:
            total += prob
    return total


def wilson(failures: int, shots: int, z: float = 1.959964) -> tuple[float, float]:
    """Closed-form Wilson score interval."""
    f = failures / shots
    denom = 1 + z * z / shots
    centre = f + z * z / (2 * shots)
    spread = z * math.sqrt(f * (1 - f) / shots + z * z / (4 * shots * shots))
    return (centre - spread) / denom, (centre + spread) / denom
