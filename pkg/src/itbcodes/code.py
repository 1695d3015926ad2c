"""Bicycle CSS codes from a polynomial pair: H_X = (A | B), H_Z = (B^T | A^T)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np

from .algebra import Poly, Torus, poly_parse, poly_transpose
from .linalg import (
    BitMatrix,
    BitVector,
    hstack,
    in_row_space,
    inverse,
    kernel_matrix,
    rank,
    reduce_against,
    rref,
)


class CodeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CssCode:
    hx: BitMatrix
    hz: BitMatrix
    k: int
    logicals_x: tuple[BitVector, ...]
    logicals_z: tuple[BitVector, ...]
    torus: Torus | None = None
    a_poly: Poly | None = None
    b_poly: Poly | None = None
    name: str | None = None
    rank_x: int = 0
    rank_z: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.hx.cols

    @property
    def stabilizer_weight(self) -> int:
        if self.a_poly is not None and self.b_poly is not None:
            return self.a_poly.weight + self.b_poly.weight
        return int(max(self.hx.row_weights().max(initial=0), self.hz.row_weights().max(initial=0)))

    @property
    def self_dual(self) -> bool:
        return self.a_poly is not None and self.b_poly == poly_transpose(self.a_poly)

    @property
    def label(self) -> str:
        return self.name or f"{self.n}_{self.k}"

    def translation_anchors(self) -> list[int]:
        """One qubit from each orbit of the group acting on the two blocks."""
        if self.torus is None:
            return list(range(self.n))
        return [0, self.torus.order]

    @cached_property
    def hx_dense(self) -> np.ndarray:
        return self.hx.to_dense()

    @cached_property
    def hz_dense(self) -> np.ndarray:
        return self.hz.to_dense()

    def sector_matrices(self, sector: str) -> tuple[BitMatrix, BitMatrix, tuple[BitVector, ...], tuple[BitVector, ...]]:
        """(opposing check, same-type check, own logicals, dual logicals).

        X-type logicals live in ker(H_Z) modulo rowspace(H_X) and are
        detected by pairing with the Z logicals; Z is the mirror image.
        """
        if sector == "X":
            return self.hz, self.hx, self.logicals_x, self.logicals_z
        if sector == "Z":
            return self.hx, self.hz, self.logicals_z, self.logicals_x
        raise ValueError(f"sector must be 'X' or 'Z', got {sector!r}")

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {"name": self.label}
        if self.torus is not None:
            rec["torus"] = list(self.torus.dims)
            rec["a"] = str(self.a_poly)
            rec["b"] = str(self.b_poly)
        rec.update(
            n=self.n,
            k=self.k,
            stabilizer_weight=self.stabilizer_weight,
            self_dual=self.self_dual,
        )
        rec.update(self.meta)
        return rec


def build_code(t: Torus, a: Poly, b: Poly, name: str | None = None) -> CssCode:
    if a.torus != t or b.torus != t:
        raise CodeError("polynomials must live on the given torus")
    if a.weight == 0 or b.weight == 0:
        raise CodeError("zero polynomial")
    A = a.to_matrix()
    B = b.to_matrix()
    hx = hstack([A, B])
    hz = hstack([B.T, A.T])
    return _finish(hx, hz, torus=t, a_poly=a, b_poly=b, name=name)


def code_from_strings(torus: str | Torus, a: str, b: str | None = None, name: str | None = None) -> CssCode:
    """Convenience constructor; ``b=None`` builds the self-dual code B = A^T."""
    t = torus if isinstance(torus, Torus) else Torus.parse(torus)
    pa = poly_parse(a, t)
    pb = poly_transpose(pa) if b is None else poly_parse(b, t)
    return build_code(t, pa, pb, name=name)


def code_from_matrices(hx: BitMatrix, hz: BitMatrix, name: str | None = None) -> CssCode:
    if hx.cols != hz.cols:
        raise CodeError("H_X and H_Z must have the same number of columns")
    if not (hx @ hz.T).is_zero():
        raise CodeError("H_X H_Z^T != 0")
    return _finish(hx, hz, name=name)


def _finish(hx: BitMatrix, hz: BitMatrix, **kw) -> CssCode:
    rx = rank(hx)
    rz = rank(hz)
    k = hx.cols - rx - rz
    if k < 0:
        raise CodeError("negative k: H_X and H_Z are not orthogonal")
    lx, lz = _logicals(hx, hz, k)
    return CssCode(hx=hx, hz=hz, k=k, logicals_x=lx, logicals_z=lz, rank_x=rx, rank_z=rz, **kw)


def _complement(kernel_of: BitMatrix, modulo: BitMatrix) -> BitMatrix:
    """Basis of ker(kernel_of) modulo rowspace(modulo), in reduced form."""
    red, pivots = rref(modulo)
    ker = kernel_matrix(kernel_of)
    resid = reduce_against(red, pivots, ker)
    rr, rp = rref(resid)
    return BitMatrix(rr.words[: len(rp)], len(rp), rr.cols)


def _logicals(hx: BitMatrix, hz: BitMatrix, k: int):
    if k == 0:
        return (), ()
    lx = _complement(hz, hx)
    lz = _complement(hx, hz)
    if lx.rows != k or lz.rows != k:
        raise CodeError("logical basis size disagrees with k")
    pairing = lx @ lz.T
    # rows of lz -> (P^-1)^T lz makes the pairing the identity
    lz = inverse(pairing).T @ lz
    return tuple(lx.row_vectors()), tuple(lz.row_vectors())


def logical_basis(code: CssCode) -> tuple[tuple[BitVector, ...], tuple[BitVector, ...]]:
    return code.logicals_x, code.logicals_z


def signature_words(vectors: tuple[BitVector, ...], n: int) -> np.ndarray:
    """Per-qubit bitmask of which vectors contain that qubit, as (n, words) uint64.

    XOR-ing the rows of a support gives the pairing of that support with every
    vector at once.
    """
    k = len(vectors)
    nw = max(1, (k + 63) >> 6)
    out = np.zeros((n, nw), dtype=np.uint64)
    for j, v in enumerate(vectors):
        dense = v.to_dense().astype(bool)
        out[dense, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return out


def pairing_dense(vectors: tuple[BitVector, ...], n: int) -> np.ndarray:
    """(n, k) uint8 matrix whose column j is vector j."""
    if not vectors:
        return np.zeros((n, 0), dtype=np.uint8)
    return np.stack([v.to_dense() for v in vectors], axis=1)


@dataclass
class CssReport:
    checks: dict[str, bool]
    details: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict[str, Any]:
        return {"ok": self.ok, "checks": dict(self.checks), "details": dict(self.details)}


def verify_css(code: CssCode) -> CssReport:
    checks: dict[str, bool] = {}
    details: dict[str, str] = {}
    checks["orthogonality"] = (code.hx @ code.hz.T).is_zero()
    rx, rz = rank(code.hx), rank(code.hz)
    k = code.n - rx - rz
    checks["k_formula"] = k == code.k and k >= 0
    details["k_formula"] = f"n={code.n} rank_x={rx} rank_z={rz} -> k={k} (stored {code.k})"
    if code.a_poly is not None and code.b_poly is not None:
        w = code.a_poly.weight + code.b_poly.weight
        checks["row_weights"] = bool(np.all(code.hx.row_weights() == w) and np.all(code.hz.row_weights() == w))
        details["row_weights"] = f"expected {w}"
    lx, lz = code.logicals_x, code.logicals_z
    if len(lx) != code.k or len(lz) != code.k:
        checks["logical_count"] = False
    else:
        checks["logical_count"] = True
    if code.k and checks["logical_count"]:
        LX = BitMatrix.from_rows(list(lx))
        LZ = BitMatrix.from_rows(list(lz))
        checks["logical_pairing"] = (LX @ LZ.T) == BitMatrix.identity(code.k)
        checks["logicals_commute"] = (code.hz @ LX.T).is_zero() and (code.hx @ LZ.T).is_zero()
        checks["logicals_nontrivial"] = not any(in_row_space(code.hx, v) for v in lx) and not any(
            in_row_space(code.hz, v) for v in lz
        )
    else:
        checks["logical_pairing"] = True
    return CssReport(checks, details)
