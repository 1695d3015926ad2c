"""Exhaustive search over polynomial pairs on a torus.

Pairs are deduplicated up to independent translation of A and B, the swap
(A, B) -> (B, A) and the transpose (A, B) -> (A^T, B^T). Each of these maps a
code to an equivalent one (a qubit permutation, possibly with X and Z
exchanged). A pair is visited only when it is already the lexicographically
smallest member of its orbit, so deduplication needs no shared state and
contiguous index ranges can be processed and checkpointed independently.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np

from . import kernels
from .algebra import Poly, Torus
from .code import CssCode, build_code, verify_css
from .distance import (
    DistanceCertificate,
    DistancePolicy,
    SectorBound,
    certify_distance,
    exhaustive_logical_search,
    random_is_upper_bound,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchSpec:
    torus: Torus
    weight_a: int = 3
    weight_b: int = 3
    require_asymmetric: bool = True
    normalize_identity: bool = True
    dedupe: bool = True
    min_k: int = 1
    min_d: int = 4
    triage_iterations: int = 1000
    certify: str = "front"  # "front", "all" or "none"
    policy: DistancePolicy = field(default_factory=DistancePolicy)
    seed: int = 0
    pair_range: tuple[int, int] | None = None
    chunk: int = 4096
    max_n: int = 400

    def __post_init__(self):
        if self.weight_a < 1 or self.weight_b < 1:
            raise ValueError("polynomial weights must be >= 1")
        if self.min_k < 0 or self.min_d < 0:
            raise ValueError("thresholds must be >= 0")
        if self.certify not in ("front", "all", "none"):
            raise ValueError(f"certify must be front, all or none, got {self.certify!r}")
        if self.torus.n > self.max_n:
            raise ValueError(f"n = {self.torus.n} exceeds the cap {self.max_n}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "torus": list(self.torus.dims),
            "weight_a": self.weight_a,
            "weight_b": self.weight_b,
            "require_asymmetric": self.require_asymmetric,
            "normalize_identity": self.normalize_identity,
            "dedupe": self.dedupe,
            "min_k": self.min_k,
            "min_d": self.min_d,
            "triage_iterations": self.triage_iterations,
            "certify": self.certify,
            "seed": self.seed,
            "pair_range": list(self.pair_range) if self.pair_range else None,
        }


@dataclass
class SearchHit:
    torus: Torus
    a: Poly
    b: Poly
    n: int
    k: int
    canonical_id: str
    pair_index: int
    certificate: DistanceCertificate

    @property
    def d(self) -> int | None:
        return self.certificate.d

    @property
    def d_upper(self) -> int:
        return self.certificate.upper

    @property
    def d_lower(self) -> int:
        return self.certificate.lower

    @property
    def d_flag(self) -> str:
        return "exact" if self.certificate.exact else "upper-bound"

    @property
    def kd2n(self) -> float:
        return self.k * self.d_upper**2 / self.n

    def sort_key(self) -> tuple:
        return (-self.kd2n, self.n, self.canonical_id)

    def code(self) -> CssCode:
        return build_code(self.torus, self.a, self.b)

    def to_dict(self) -> dict[str, Any]:
        return {
            "torus": list(self.torus.dims),
            "a": str(self.a),
            "b": str(self.b),
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "d_lower": self.d_lower,
            "d_upper": self.d_upper,
            "d_flag": self.d_flag,
            "kd2_over_n": self.kd2n,
            "canonical_id": self.canonical_id,
            "pair_index": self.pair_index,
            "certificate": self.certificate.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SearchHit":
        t = Torus(*data["torus"])
        return cls(
            torus=t,
            a=Poly.parse(data["a"], t),
            b=Poly.parse(data["b"], t),
            n=data["n"],
            k=data["k"],
            canonical_id=data["canonical_id"],
            pair_index=data["pair_index"],
            certificate=DistanceCertificate.from_dict(data["certificate"], data["n"]),
        )


def ord2(m: int) -> int:
    """Multiplicative order of 2 modulo odd m (1 for m = 1)."""
    if m < 1 or m % 2 == 0:
        raise ValueError(f"ord2 needs an odd positive modulus, got {m}")
    if m == 1:
        return 1
    r, x = 1, 2 % m
    while x != 1:
        x = (2 * x) % m
        r += 1
    return r


# --------------------------------------------------------------------------
# pair enumeration


def _combos(N: int, w: int, normalized: bool) -> np.ndarray:
    if normalized:
        rows = [(0, *c) for c in itertools.combinations(range(1, N), w - 1)]
    else:
        rows = list(itertools.combinations(range(N), w))
    return np.array(rows, dtype=np.int64).reshape(len(rows), w)


class PairSpace:
    """Index <-> pair mapping; pair i is (combo_a[i // nb], combo_b[i % nb])."""

    def __init__(self, spec: SearchSpec):
        N = spec.torus.order
        self.ca = _combos(N, spec.weight_a, spec.normalize_identity)
        self.cb = self.ca if spec.weight_b == spec.weight_a else _combos(N, spec.weight_b, spec.normalize_identity)
        self.size = len(self.ca) * len(self.cb)

    def indices(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        idx = np.arange(lo, hi, dtype=np.int64)
        nb = len(self.cb)
        return self.ca[idx // nb], self.cb[idx % nb]


def pair_count(spec: SearchSpec) -> int:
    N = spec.torus.order
    if spec.normalize_identity:
        return math.comb(N - 1, spec.weight_a - 1) * math.comb(N - 1, spec.weight_b - 1)
    return math.comb(N, spec.weight_a) * math.comb(N, spec.weight_b)


def enumerate_pairs(spec: SearchSpec) -> Iterator[tuple[Poly, Poly]]:
    space = PairSpace(spec)
    t = spec.torus
    for ra in space.ca:
        pa = Poly.from_indices(t, ra)
        for rb in space.cb:
            yield pa, Poly.from_indices(t, rb)


# --------------------------------------------------------------------------
# canonical forms


def _canon_poly(t: Torus, idx: Iterable[int]) -> tuple[int, ...]:
    add, neg = t.addition_table, t.negation
    idx = list(idx)
    return min(tuple(sorted(int(add[i, neg[g]]) for i in idx)) for g in idx)


def canonical_key(a: Poly, b: Poly) -> tuple[int, ...]:
    if a.torus != b.torus:
        raise ValueError("polynomials live on different tori")
    t = a.torus
    ca, cb = _canon_poly(t, a.indices()), _canon_poly(t, b.indices())
    cat, cbt = _canon_poly(t, a.T.indices()), _canon_poly(t, b.T.indices())
    return min((len(p), *p, *q) for p, q in ((ca, cb), (cb, ca), (cat, cbt), (cbt, cat)))


def _key_id(key: Iterable[int]) -> str:
    key = [int(x) for x in key]
    w = key[0]
    return ",".join(map(str, key[1 : 1 + w])) + "|" + ",".join(map(str, key[1 + w :]))


def canonical_form(a: Poly, b: Poly) -> str:
    """Orbit id under translations, the swap and the transpose, as ``"P|Q"``."""
    return _key_id(canonical_key(a, b))


def is_transpose_like(a: Poly, b: Poly) -> bool:
    """True when B is a translate of A^T (the pair is then equivalent to a self-dual one)."""
    t = a.torus
    return a.weight == b.weight and _canon_poly(t, b.indices()) == _canon_poly(t, a.T.indices())


# --------------------------------------------------------------------------
# the search driver


def _pareto(hits: list[SearchHit]) -> list[SearchHit]:
    front = []
    for h in hits:
        dominated = any(
            o.k >= h.k and o.d_upper >= h.d_upper and (o.k > h.k or o.d_upper > h.d_upper) for o in hits
        )
        if not dominated:
            front.append(h)
    return front


def _triage(spec: SearchSpec, code: CssCode, pair_index: int) -> DistanceCertificate | None:
    """Cheap IS upper bound plus an exhaustive sweep below min_d; None if rejected."""
    sectors = ("X",) if code.self_dual else ("X", "Z")
    bounds = {}
    for s in sectors:
        isr = random_is_upper_bound(code, s, spec.triage_iterations, seed=spec.seed ^ pair_index, threads=1)
        if isr.weight is None or isr.weight < spec.min_d:
            return None
        lower, nodes = 1, 0
        if spec.min_d > 1:
            ex = exhaustive_logical_search(code, s, spec.min_d - 1)
            if ex.witness is not None:
                return None
            lower, nodes = ex.certified_above + 1, ex.nodes
        bounds[s] = SectorBound(lower, isr.weight, "exhaustive", "random-IS", isr.witness, isr.iterations, nodes)
    if code.self_dual:
        return DistanceCertificate(bounds["X"], bounds["X"], mirrored=True)
    return DistanceCertificate(bounds["X"], bounds["Z"])


def _read_checkpoint(path: Path) -> tuple[list[tuple[int, int]], list[SearchHit]]:
    done, hits = [], []
    if not path.exists():
        return done, hits
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                # a torn final line from an interrupted write
                break
            if rec.get("type") == "range":
                done.append((rec["lo"], rec["hi"]))
                hits.extend(SearchHit.from_dict(h) for h in rec["hits"])
    return done, hits


def _process_range(spec: SearchSpec, space: PairSpace, lo: int, hi: int) -> list[SearchHit]:
    t = spec.torus
    add = np.ascontiguousarray(t.addition_table)
    neg = np.ascontiguousarray(t.negation)
    a_idx, b_idx = space.indices(lo, hi)
    keys, tlike = kernels.canonical_keys(add, neg, a_idx, b_idx)
    keep = np.ones(hi - lo, dtype=bool)
    if spec.require_asymmetric:
        keep &= ~tlike
    if spec.dedupe:
        own = np.concatenate([np.full((hi - lo, 1), spec.weight_a), a_idx, b_idx], axis=1)
        keep &= np.all(keys == own, axis=1)
    sel = np.flatnonzero(keep)
    if sel.size == 0:
        return []
    ks = kernels.batch_pair_k(add, neg, np.ascontiguousarray(a_idx[sel]), np.ascontiguousarray(b_idx[sel]))
    hits = []
    for j in np.flatnonzero(ks >= max(spec.min_k, 1)):
        i = int(sel[j])
        pa = Poly.from_indices(t, a_idx[i])
        pb = Poly.from_indices(t, b_idx[i])
        code = build_code(t, pa, pb)
        cert = _triage(spec, code, lo + i)
        if cert is None:
            continue
        hits.append(SearchHit(t, pa, pb, code.n, code.k, _key_id(keys[i]), lo + i, cert))
    return hits


def run_search(
    spec: SearchSpec,
    checkpoint: str | Path | None = None,
    progress: bool = False,
) -> list[SearchHit]:
    space = PairSpace(spec)
    lo_all, hi_all = spec.pair_range or (0, space.size)
    hi_all = min(hi_all, space.size)
    ck = Path(checkpoint) if checkpoint else None
    done, hits = _read_checkpoint(ck) if ck else ([], [])
    done_set = set(done)
    t0 = time.monotonic()
    processed = 0
    total = max(hi_all - lo_all, 1)
    for lo in range(lo_all, hi_all, spec.chunk):
        hi = min(lo + spec.chunk, hi_all)
        if (lo, hi) in done_set:
            continue
        found = _process_range(spec, space, lo, hi)
        hits.extend(found)
        if ck:
            with open(ck, "a") as fh:
                fh.write(json.dumps({"type": "range", "lo": lo, "hi": hi, "hits": [h.to_dict() for h in found]}) + "\n")
        processed += hi - lo
        if progress:
            el = time.monotonic() - t0
            frac = (hi - lo_all) / total
            eta = el / processed * (hi_all - hi)
            log.info("search %s: %.1f%% (%d hits) eta %.0fs", spec.torus, 100 * frac, len(hits), eta)
    targets = {"all": hits, "front": _pareto(hits), "none": []}[spec.certify]
    ids = {id(h) for h in targets}
    for h in hits:
        if id(h) not in ids:
            continue
        full = certify_distance(h.code(), spec.policy)
        # keep the tighter of the triage and full bounds per sector
        for s in ("x", "z"):
            old, new = getattr(h.certificate, s), getattr(full, s)
            if new.lower < old.lower:
                new.lower, new.lower_method = old.lower, old.lower_method
            if old.upper is not None and (new.upper is None or old.upper < new.upper):
                new.upper, new.upper_method, new.witness = old.upper, old.upper_method, old.witness
        h.certificate = full
    hits = [h for h in hits if h.d_upper >= spec.min_d and h.k >= spec.min_k]
    hits.sort(key=SearchHit.sort_key)
    return hits


def validate_hit(hit: SearchHit) -> bool:
    from .distance import validate_witness

    code = hit.code()
    if not verify_css(code).ok or code.k != hit.k:
        return False
    for s, b in (("X", hit.certificate.x), ("Z", hit.certificate.z)):
        if b.witness is not None and not validate_witness(code, s, b.witness, b.upper):
            return False
        if b.upper is not None and b.lower > b.upper:
            return False
    return True


def _lcm(dims: Iterable[int]) -> int:
    out = 1
    for d in dims:
        out = out * d // math.gcd(out, d)
    return out


def k6_divisibility_report(hits: Iterable[SearchHit | dict]) -> dict[str, Any]:
    """Flag k = 6 hits on tori where 7 does not divide lcm(l1, l2, l3)."""
    per_torus: dict[str, dict[str, Any]] = {}
    violations = []
    for h in hits:
        dims = tuple(h.torus.dims) if isinstance(h, SearchHit) else tuple(h["torus"])
        k = h.k if isinstance(h, SearchHit) else h["k"]
        key = ",".join(map(str, dims))
        lcm = _lcm(dims)
        entry = per_torus.setdefault(key, {"lcm": lcm, "seven_divides": lcm % 7 == 0, "hits": 0, "k6": 0})
        entry["hits"] += 1
        if k == 6:
            entry["k6"] += 1
            if lcm % 7:
                violations.append(h.to_dict() if isinstance(h, SearchHit) else h)
    return {"tori": per_torus, "violations": violations, "ok": not violations}


__all__ = [
    "PairSpace",
    "SearchHit",
    "SearchSpec",
    "canonical_form",
    "canonical_key",
    "enumerate_pairs",
    "is_transpose_like",
    "k6_divisibility_report",
    "ord2",
    "pair_count",
    "run_search",
    "validate_hit",
]
