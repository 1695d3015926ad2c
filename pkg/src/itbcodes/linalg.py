"""Dense bit-packed GF(2) matrices and vectors.

Rows are stored as little-endian ``uint64`` words, 64 columns per word, column
``j`` at bit ``j % 64`` of word ``j // 64``. Pad bits past ``cols`` are always
zero so popcounts are exact.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels


def _pack(dense: np.ndarray) -> np.ndarray:
    dense = np.asarray(dense, dtype=np.uint8)
    if dense.ndim != 2:
        raise ValueError("expected a 2-D array")
    m, n = dense.shape
    nw = kernels.words_for(n)
    padded = np.zeros((m, nw * 64), dtype=np.uint8)
    padded[:, :n] = dense & 1
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").astype(np.uint64).reshape(m, nw)


def _unpack(words: np.ndarray, n: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype="<u8")
    bits = np.unpackbits(words.view(np.uint8).reshape(words.shape[0], -1), axis=1, bitorder="little")
    return bits[:, :n]


class BitVector:
    """A GF(2) vector of fixed length."""

    __slots__ = ("words", "len")

    def __init__(self, words: np.ndarray, length: int):
        self.words = np.asarray(words, dtype=np.uint64)
        self.len = int(length)

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(np.zeros(kernels.words_for(length), dtype=np.uint64), length)

    @classmethod
    def from_dense(cls, bits: Sequence[int] | np.ndarray) -> "BitVector":
        bits = np.asarray(bits, dtype=np.uint8).reshape(1, -1)
        return cls(_pack(bits)[0], bits.shape[1])

    @classmethod
    def from_support(cls, length: int, support: Iterable[int]) -> "BitVector":
        bits = np.zeros(length, dtype=np.uint8)
        bits[list(support)] = 1
        return cls.from_dense(bits)

    @classmethod
    def from_hex(cls, text: str, length: int) -> "BitVector":
        """Inverse of :meth:`to_hex`."""
        value = int(text, 16) if text else 0
        return cls.from_support(length, [j for j in range(length) if (value >> j) & 1])

    def to_dense(self) -> np.ndarray:
        return _unpack(self.words.reshape(1, -1), self.len)[0]

    def support(self) -> list[int]:
        return np.flatnonzero(self.to_dense()).tolist()

    def weight(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def to_hex(self) -> str:
        """Hex of the integer whose bit j is entry j."""
        return format(sum(1 << j for j in self.support()), "x")

    def dot(self, other: "BitVector") -> int:
        if other.len != self.len:
            raise ValueError("length mismatch")
        return int(np.bitwise_count(self.words & other.words).sum()) & 1

    def __xor__(self, other: "BitVector") -> "BitVector":
        if other.len != self.len:
            raise ValueError("length mismatch")
        return BitVector(self.words ^ other.words, self.len)

    def __eq__(self, other) -> bool:
        return isinstance(other, BitVector) and other.len == self.len and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.len, self.words.tobytes()))

    def any(self) -> bool:
        return bool(self.words.any())

    def __len__(self) -> int:
        return self.len

    def __repr__(self) -> str:
        return f"BitVector(len={self.len}, support={self.support()})"


class BitMatrix:
    """A dense GF(2) matrix with bit-packed rows."""

    __slots__ = ("words", "rows", "cols")

    def __init__(self, words: np.ndarray, rows: int, cols: int):
        words = np.asarray(words, dtype=np.uint64).reshape(rows, kernels.words_for(cols))
        self.words = words
        self.rows = int(rows)
        self.cols = int(cols)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(np.zeros((rows, kernels.words_for(cols)), dtype=np.uint64), rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense) -> "BitMatrix":
        dense = np.asarray(dense, dtype=np.uint8)
        if dense.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(_pack(dense), *dense.shape)

    @classmethod
    def from_rows(cls, vectors: Sequence[BitVector], cols: int | None = None) -> "BitMatrix":
        if not vectors:
            if cols is None:
                raise ValueError("cols required for an empty row list")
            return cls.zeros(0, cols)
        cols = vectors[0].len if cols is None else cols
        if any(v.len != cols for v in vectors):
            raise ValueError("row length mismatch")
        return cls(np.stack([v.words for v in vectors]), len(vectors), cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.words.copy(), self.rows, self.cols)

    def to_dense(self) -> np.ndarray:
        if self.rows == 0:
            return np.zeros((0, self.cols), dtype=np.uint8)
        return _unpack(self.words, self.cols)

    def row(self, i: int) -> BitVector:
        return BitVector(self.words[i].copy(), self.cols)

    def row_vectors(self) -> list[BitVector]:
        return [self.row(i) for i in range(self.rows)]

    def row_weights(self) -> np.ndarray:
        return np.bitwise_count(self.words).sum(axis=1).astype(np.int64)

    @property
    def T(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            if other.len != self.cols:
                raise ValueError(f"dimension mismatch: {self.shape} @ {other.len}")
            par = np.bitwise_count(self.words & other.words[None, :]).sum(axis=1) & 1
            return BitVector.from_dense(par.astype(np.uint8))
        if isinstance(other, BitMatrix):
            if other.rows != self.cols:
                raise ValueError(f"dimension mismatch: {self.shape} @ {other.shape}")
            a = self.to_dense().astype(np.int64)
            b = other.to_dense().astype(np.int64)
            return BitMatrix.from_dense((a @ b) & 1)
        return NotImplemented

    def __xor__(self, other: "BitMatrix") -> "BitMatrix":
        if other.shape != self.shape:
            raise ValueError("shape mismatch")
        return BitMatrix(self.words ^ other.words, self.rows, self.cols)

    def __eq__(self, other) -> bool:
        return isinstance(other, BitMatrix) and other.shape == self.shape and np.array_equal(self.words, other.words)

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.words.any()

    def __repr__(self) -> str:
        return f"BitMatrix({self.rows}x{self.cols})"


def hstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
    return BitMatrix.from_dense(np.hstack([b.to_dense() for b in blocks]))


def vstack(blocks: Sequence[BitMatrix]) -> BitMatrix:
    cols = {b.cols for b in blocks}
    if len(cols) != 1:
        raise ValueError("column mismatch")
    return BitMatrix(np.vstack([b.words for b in blocks]), sum(b.rows for b in blocks), cols.pop())


def rref(m: BitMatrix) -> tuple[BitMatrix, list[int]]:
    """Fully reduced row echelon form and the pivot columns."""
    words = m.words.copy()
    pivots = kernels.rref_packed(words, m.cols)
    return BitMatrix(words, m.rows, m.cols), [int(p) for p in pivots]


def rank(m: BitMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return len(rref(m)[1])


def kernel_basis(m: BitMatrix) -> list[BitVector]:
    """Basis of {v : m v = 0}, one vector per free column."""
    return kernel_matrix(m).row_vectors()


def kernel_matrix(m: BitMatrix) -> BitMatrix:
    red, pivots = rref(m)
    n = m.cols
    free = np.setdiff1d(np.arange(n), pivots)
    basis = np.zeros((free.size, n), dtype=np.uint8)
    if free.size:
        basis[np.arange(free.size), free] = 1
        if pivots:
            dense = red.to_dense()[: len(pivots)]
            basis[:, pivots] = dense[:, free].T
    return BitMatrix.from_dense(basis) if free.size else BitMatrix.zeros(0, n)


def reduce_against(red: BitMatrix, pivots: Sequence[int], vecs: BitMatrix) -> BitMatrix:
    """Residues of the rows of ``vecs`` modulo the row space of a reduced matrix."""
    out = vecs.words.copy()
    for i, c in enumerate(pivots):
        w, b = c >> 6, np.uint64(c & 63)
        mask = ((out[:, w] >> b) & np.uint64(1)).astype(bool)
        if mask.any():
            out[mask] ^= red.words[i]
    return BitMatrix(out, vecs.rows, vecs.cols)


def in_row_space(m: BitMatrix, v: BitVector) -> bool:
    if v.len != m.cols:
        raise ValueError(f"length mismatch: vector {v.len}, matrix cols {m.cols}")
    red, pivots = rref(m)
    res = reduce_against(red, pivots, BitMatrix(v.words[None, :], 1, v.len))
    return not res.words.any()


def solve(m: BitMatrix, s: BitVector) -> BitVector | None:
    """Some e with m e = s, or None when s is outside the column space."""
    if s.len != m.rows:
        raise ValueError(f"dimension mismatch: syndrome {s.len}, matrix rows {m.rows}")
    aug = np.hstack([m.to_dense(), s.to_dense()[:, None]])
    words = _pack(aug)
    pivots = kernels.rref_packed(words, m.cols)
    red = _unpack(words, m.cols + 1)
    r = len(pivots)
    if red[r:, m.cols].any():
        return None
    e = np.zeros(m.cols, dtype=np.uint8)
    e[pivots] = red[:r, m.cols]
    return BitVector.from_dense(e)


def inverse(m: BitMatrix) -> BitMatrix:
    """Inverse of a square invertible matrix."""
    if m.rows != m.cols:
        raise ValueError("matrix is not square")
    n = m.rows
    aug = _pack(np.hstack([m.to_dense(), np.eye(n, dtype=np.uint8)]))
    pivots = kernels.rref_packed(aug, n)
    if len(pivots) != n:
        raise ValueError("matrix is singular")
    return BitMatrix.from_dense(_unpack(aug, 2 * n)[:, n:])


# --------------------------------------------------------------------------
# text formats


def write_alist(m: BitMatrix, path: str | Path) -> None:
    """MacKay's alist sparse format."""
    dense = m.to_dense()
    col_lists = [np.flatnonzero(dense[:, j]) + 1 for j in range(m.cols)]
    row_lists = [np.flatnonzero(dense[i]) + 1 for i in range(m.rows)]
    max_c = max((len(c) for c in col_lists), default=0)
    max_r = max((len(r) for r in row_lists), default=0)

    def padded(lst, width):
        vals = list(map(int, lst)) + [0] * (width - len(lst))
        return " ".join(map(str, vals))

    lines = [
        f"{m.cols} {m.rows}",
        f"{max_c} {max_r}",
        " ".join(str(len(c)) for c in col_lists),
        " ".join(str(len(r)) for r in row_lists),
        *(padded(c, max_c) for c in col_lists),
        *(padded(r, max_r) for r in row_lists),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def read_alist(path: str | Path) -> BitMatrix:
    tokens = Path(path).read_text().split()
    it = iter(int(t) for t in tokens)
    n, m = next(it), next(it)
    max_c, _max_r = next(it), next(it)
    col_deg = [next(it) for _ in range(n)]
    for _ in range(m):
        next(it)
    dense = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        entries = [next(it) for _ in range(max_c)]
        for r in entries[: col_deg[j]]:
            dense[r - 1, j] = 1
    return BitMatrix.from_dense(dense)


def write_dense(m: BitMatrix, path: str | Path) -> None:
    """One line of 0/1 characters per row."""
    dense = m.to_dense()
    Path(path).write_text("".join("".join("1" if b else "0" for b in row) + "\n" for row in dense))


def read_dense(path: str | Path) -> BitMatrix:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    if any(set(ln) - {"0", "1"} for ln in lines):
        raise ValueError("dense matrix rows may contain only 0 and 1")
    return BitMatrix.from_dense(np.array([[c == "1" for c in ln] for ln in lines], dtype=np.uint8))
