"""Distance bounds for CSS codes.

Upper bounds come from randomized information-set sampling: permute the
columns of a generator of ker(H_Z), row-reduce, and keep the lightest row that
pairs nontrivially with a Z logical. Lower bounds come from an exhaustive
meet-in-the-middle sweep over all supports of a given weight. Both routes
share one test for "is a logical": zero syndrome under the opposing checks
and a nonzero signature against the dual logical basis.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from . import kernels
from ._backend import default_threads
from .code import CssCode, pairing_dense, signature_words
from .linalg import BitVector, _pack, in_row_space, kernel_matrix

SECTORS = ("X", "Z")


class DistanceError(ValueError):
    pass


@dataclass
class ExhaustiveResult:
    sector: str
    witness: BitVector | None
    certified_above: int  # every logical of this sector has weight > this
    inconclusive_at: int | None = None
    nodes: int = 0

    @property
    def weight(self) -> int | None:
        return None if self.witness is None else self.witness.weight()


@dataclass
class ISResult:
    sector: str
    witness: BitVector | None
    iterations: int

    @property
    def weight(self) -> int | None:
        return None if self.witness is None else self.witness.weight()


@dataclass
class SectorBound:
    lower: int
    upper: int | None
    lower_method: str
    upper_method: str | None
    witness: BitVector | None = None
    is_iterations: int = 0
    exhaustive_nodes: int = 0

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.lower == self.upper


@dataclass
class DistanceCertificate:
    x: SectorBound
    z: SectorBound
    mirrored: bool = False

    @property
    def d_x_lower(self) -> int:
        return self.x.lower

    @property
    def d_x_upper(self) -> int | None:
        return self.x.upper

    @property
    def d_z_lower(self) -> int:
        return self.z.lower

    @property
    def d_z_upper(self) -> int | None:
        return self.z.upper

    @property
    def exact(self) -> bool:
        return self.x.exact and self.z.exact

    @property
    def lower(self) -> int:
        return min(self.x.lower, self.z.lower)

    @property
    def upper(self) -> int | None:
        ups = [u for u in (self.x.upper, self.z.upper) if u is not None]
        return min(ups) if ups else None

    @property
    def d(self) -> int | None:
        return self.upper if self.exact else None

    def summary(self) -> str:
        if self.exact:
            return f"d = {self.d} (exact)"
        if self.upper is None:
            return f"d >= {self.lower}"
        return f"{self.lower} <= d <= {self.upper}"

    def to_dict(self) -> dict[str, Any]:
        def sector(s: SectorBound) -> dict[str, Any]:
            return {
                "lower": s.lower,
                "upper": s.upper,
                "lower_method": s.lower_method,
                "upper_method": s.upper_method,
                "witness": None if s.witness is None else s.witness.to_hex(),
                "is_iterations": s.is_iterations,
                "exhaustive_nodes": s.exhaustive_nodes,
            }

        return {
            "d_x_lower": self.d_x_lower,
            "d_x_upper": self.d_x_upper,
            "d_z_lower": self.d_z_lower,
            "d_z_upper": self.d_z_upper,
            "exact": self.exact,
            "d": self.d,
            "mirrored": self.mirrored,
            "x": sector(self.x),
            "z": sector(self.z),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], n: int) -> "DistanceCertificate":
        def sector(s: dict[str, Any]) -> SectorBound:
            w = s.get("witness")
            return SectorBound(
                lower=s["lower"],
                upper=s["upper"],
                lower_method=s["lower_method"],
                upper_method=s["upper_method"],
                witness=None if w is None else BitVector.from_hex(w, n),
                is_iterations=s.get("is_iterations", 0),
                exhaustive_nodes=s.get("exhaustive_nodes", 0),
            )

        return cls(sector(data["x"]), sector(data["z"]), data.get("mirrored", False))


@dataclass(frozen=True)
class DistancePolicy:
    is_iterations: int = 100_000
    exhaustive_cap: int | None = None
    node_limit: int = 10**10
    table_limit: int = 2 * 10**7
    seed: int = 0
    threads: int | None = None
    mirror_self_dual: bool = True
    early_stop_nodes: int = 10**8


def is_logical(code: CssCode, sector: str, v: BitVector) -> bool:
    opp, same, _, _ = code.sector_matrices(sector)
    return not (opp @ v).any() and not in_row_space(same, v)


def validate_witness(code: CssCode, sector: str, v: BitVector, weight: int | None = None) -> bool:
    ok = is_logical(code, sector, v)
    return ok and (weight is None or v.weight() == weight)


def _syndrome_columns(code: CssCode, sector: str) -> tuple[np.ndarray, np.ndarray]:
    opp, _, _, dual = code.sector_matrices(sector)
    cols = _pack(opp.to_dense().T)
    return np.ascontiguousarray(cols), signature_words(dual, code.n)


def _mitm_cost(n: int, anchors: list[int], w: int) -> tuple[int, int]:
    r = w - 1
    w1, w2 = r // 2, r - r // 2
    nodes = 0
    table = 0
    for a in anchors:
        m = n - a - 1
        if w2 > m:
            continue
        nodes += math.comb(m, w1) + math.comb(m, w2)
        table = max(table, math.comb(m, w1))
    return nodes, table


def exhaustive_logical_search(
    code: CssCode,
    sector: str,
    w_max: int,
    node_limit: int = DistancePolicy.node_limit,
    table_limit: int = DistancePolicy.table_limit,
    w_min: int = 1,
) -> ExhaustiveResult:
    """Sweep weights w_min..w_max for a logical; the first hit has minimum weight
    (given that no logical lighter than w_min exists)."""
    if w_max < 1:
        raise DistanceError("w_max must be >= 1")
    if sector not in SECTORS:
        raise DistanceError(f"unknown sector {sector!r}")
    n = code.n
    if code.k == 0:
        return ExhaustiveResult(sector, None, w_max)
    syn, sig = _syndrome_columns(code, sector)
    anchors = code.translation_anchors()
    binom = kernels.binom_table(n + 1, w_max + 1)
    used = 0
    for w in range(w_min, w_max + 1):
        nodes, table = _mitm_cost(n, anchors, w)
        if used + nodes > node_limit or table > table_limit:
            return ExhaustiveResult(sector, None, w - 1, inconclusive_at=w, nodes=used)
        used += nodes
        hits = []
        for a in anchors:
            status, sup = kernels.mitm_weight(syn, sig, a, w, binom)
            if status == kernels.FOUND:
                hits.append(tuple(int(s) for s in sup))
        if hits:
            return ExhaustiveResult(sector, BitVector.from_support(n, min(hits)), w - 1, nodes=used)
    return ExhaustiveResult(sector, None, w_max, nodes=used)


def _is_merge(a, b):
    (wa, va), (wb, vb) = a, b
    if wb < wa:
        return b
    if wb > wa:
        return a
    diff = np.flatnonzero(va != vb)
    if diff.size and vb[diff[0]] == 1:
        return b
    return a


class _ISRunner:
    """Generator/signature pair of one sector; iterations are addressed by index
    so any split of [0, m) merges to the same result."""

    def __init__(self, code: CssCode, sector: str, seed: int, threads: int | None):
        opp, _, _, dual = code.sector_matrices(sector)
        self.n = code.n
        self.gen = kernel_matrix(opp).to_dense()
        pairing = pairing_dense(dual, code.n).astype(np.int64)
        self.sig = ((self.gen.astype(np.int64) @ pairing) & 1).astype(np.uint8)
        self.seed = np.uint64(seed % (1 << 64))
        self.threads = threads or default_threads()

    def run(self, start: int, stop: int):
        total = stop - start
        nchunks = min(total, self.threads * 4) if self.threads > 1 else 1
        bounds = np.linspace(start, stop, nchunks + 1).astype(np.int64)

        def one(i):
            return kernels.random_is(self.gen, self.sig, int(bounds[i]), int(bounds[i + 1]), self.seed)

        if nchunks == 1:
            results = [one(0)]
        else:
            with ThreadPoolExecutor(self.threads) as ex:
                results = list(ex.map(one, range(nchunks)))
        best = results[0]
        for r in results[1:]:
            best = _is_merge(best, r)
        return best


def random_is_upper_bound(
    code: CssCode,
    sector: str,
    iterations: int,
    seed: int = 0,
    threads: int | None = None,
) -> ISResult:
    if iterations < 1:
        raise DistanceError("iterations must be >= 1")
    if code.k == 0:
        return ISResult(sector, None, iterations)
    w, vec = _ISRunner(code, sector, seed, threads).run(0, iterations)
    if w > code.n:
        return ISResult(sector, None, iterations)
    return ISResult(sector, BitVector.from_dense(vec), iterations)


def _sweep_cost(code: CssCode, w_max: int) -> int:
    anchors = code.translation_anchors()
    return sum(_mitm_cost(code.n, anchors, w)[0] for w in range(1, w_max + 1))


def _certify_sector(code: CssCode, sector: str, policy: DistancePolicy) -> SectorBound:
    # IS runs in growing stages and stops early once an exhaustive sweep up to
    # the current bound is cheap, since that sweep settles the sector anyway
    runner = _ISRunner(code, sector, policy.seed, policy.threads)
    best = None
    done = 0
    stage = min(policy.is_iterations, 1000)
    while done < policy.is_iterations:
        stop = min(done + stage, policy.is_iterations)
        r = runner.run(done, stop)
        best = r if best is None else _is_merge(best, r)
        done = stop
        stage *= 4
        if best[0] <= code.n and _sweep_cost(code, best[0] - 1) <= policy.early_stop_nodes:
            break
    upper = int(best[0]) if best[0] <= code.n else None
    witness = BitVector.from_dense(best[1]) if upper is not None else None
    target = upper - 1 if upper is not None else code.n
    if policy.exhaustive_cap is not None:
        target = min(target, policy.exhaustive_cap)
    bound = SectorBound(
        lower=1,
        upper=upper,
        lower_method="trivial",
        upper_method="random-IS" if upper is not None else None,
        witness=witness,
        is_iterations=done,
    )
    if target < 1:
        return bound
    ex = exhaustive_logical_search(code, sector, target, policy.node_limit, policy.table_limit)
    bound.exhaustive_nodes = ex.nodes
    if ex.witness is not None:
        # exhaustive sweep found something lighter than the IS bound
        bound.upper = ex.weight
        bound.upper_method = "exhaustive"
        bound.witness = ex.witness
        bound.lower = ex.weight
        bound.lower_method = "exhaustive"
    else:
        bound.lower = ex.certified_above + 1
        bound.lower_method = "exhaustive"
    return bound


def certify_distance(code: CssCode, policy: DistancePolicy | None = None) -> DistanceCertificate:
    if code.k == 0:
        raise DistanceError("no logical qubits")
    policy = policy or DistancePolicy()
    x = _certify_sector(code, "X", policy)
    if policy.mirror_self_dual and code.self_dual:
        cert = DistanceCertificate(x, replace(x), mirrored=True)
    else:
        cert = DistanceCertificate(x, _certify_sector(code, "Z", policy))
    for sector, bound in (("X", cert.x), ("Z", cert.z)):
        if bound.witness is not None and not validate_witness(code, sector, bound.witness, bound.upper):
            raise AssertionError(f"{sector} witness failed re-validation")
    return cert


def distance_upper_bound(code: CssCode, iterations: int, seed: int = 0, threads: int | None = None) -> dict[str, ISResult]:
    """IS bounds for both sectors (one run if the code is self-dual)."""
    x = random_is_upper_bound(code, "X", iterations, seed, threads)
    z = x if code.self_dual else random_is_upper_bound(code, "Z", iterations, seed, threads)
    return {"X": x, "Z": z}


__all__ = [
    "DistanceCertificate",
    "DistanceError",
    "DistancePolicy",
    "ExhaustiveResult",
    "ISResult",
    "SectorBound",
    "certify_distance",
    "distance_upper_bound",
    "exhaustive_logical_search",
    "is_logical",
    "random_is_upper_bound",
    "validate_witness",
]
