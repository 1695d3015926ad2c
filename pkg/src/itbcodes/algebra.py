"""The abelian group Z_l1 x Z_l2 x Z_l3 and its group algebra over F2.

Group elements are exponent triples ``(a, b, c)`` of the monomial
``x^a y^b z^c``. They are numbered ``a*l2*l3 + b*l3 + c``, which is the basis
order of the Kronecker products ``x = S ⊗ I ⊗ I``, ``y = I ⊗ S ⊗ I`` and
``z = I ⊗ I ⊗ S``. Every matrix in the package uses this numbering.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .linalg import BitMatrix


class ParseError(ValueError):
    """Raised for polynomial text that does not match the grammar."""


@dataclass(frozen=True)
class Torus:
    l1: int
    l2: int
    l3: int

    def __post_init__(self):
        for name in ("l1", "l2", "l3"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @classmethod
    def parse(cls, text: str) -> "Torus":
        """``"2,3,7"`` or ``"2x3x7"``; two lengths mean l3 = 1."""
        parts = [p for p in re.split(r"[,x× ]+", text.strip()) if p]
        if len(parts) == 2:
            parts.append("1")
        if len(parts) != 3:
            raise ValueError(f"torus needs 2 or 3 cycle lengths, got {text!r}")
        return cls(*(int(p) for p in parts))

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.l1, self.l2, self.l3)

    @property
    def order(self) -> int:
        """N = l1 * l2 * l3."""
        return self.l1 * self.l2 * self.l3

    @property
    def n(self) -> int:
        """Block length 2N of codes on this torus."""
        return 2 * self.order

    def element(self, a: int, b: int = 0, c: int = 0) -> "GroupElement":
        return GroupElement(a % self.l1, b % self.l2, c % self.l3)

    def index(self, g: "GroupElement") -> int:
        return element_index(g, self)

    def element_at(self, i: int) -> "GroupElement":
        if not 0 <= i < self.order:
            raise IndexError(i)
        a, rest = divmod(i, self.l2 * self.l3)
        b, c = divmod(rest, self.l3)
        return GroupElement(a, b, c)

    def elements(self) -> list["GroupElement"]:
        return [self.element_at(i) for i in range(self.order)]

    @cached_property
    def addition_table(self) -> np.ndarray:
        """``table[i, j]`` is the index of element i + element j."""
        l1, l2, l3 = self.dims
        a, b, c = np.unravel_index(np.arange(self.order), (l1, l2, l3))
        s = lambda u, m: (u[:, None] + u[None, :]) % m  # noqa: E731
        table = np.ravel_multi_index((s(a, l1), s(b, l2), s(c, l3)), (l1, l2, l3))
        table = table.astype(np.int64)
        table.setflags(write=False)
        return table

    @cached_property
    def negation(self) -> np.ndarray:
        l1, l2, l3 = self.dims
        a, b, c = np.unravel_index(np.arange(self.order), (l1, l2, l3))
        neg = np.ravel_multi_index((-a % l1, -b % l2, -c % l3), (l1, l2, l3)).astype(np.int64)
        neg.setflags(write=False)
        return neg

    def __str__(self) -> str:
        return f"{self.l1},{self.l2},{self.l3}"


class GroupElement(NamedTuple):
    a: int
    b: int
    c: int


def element_index(g: GroupElement, t: Torus) -> int:
    if not (0 <= g.a < t.l1 and 0 <= g.b < t.l2 and 0 <= g.c < t.l3):
        raise ValueError(f"{g} is not reduced for torus {t}")
    return (g.a * t.l2 + g.b) * t.l3 + g.c


_TERM = re.compile(r"([xyz])(?:\^?(\d+))?")


def _parse_term(term: str, t: Torus) -> GroupElement:
    if term == "1":
        return GroupElement(0, 0, 0)
    exps = [0, 0, 0]
    pos = 0
    while pos < len(term):
        m = _TERM.match(term, pos)
        if m is None:
            raise ParseError(f"unexpected {term[pos:]!r} in term {term!r}")
        e = 1 if m.group(2) is None else int(m.group(2))
        exps["xyz".index(m.group(1))] += e
        pos = m.end()
    return t.element(*exps)


@dataclass(frozen=True)
class Poly:
    """Element of F2[G]: a set of group elements with coefficient 1."""

    torus: Torus
    terms: frozenset

    @classmethod
    def from_terms(cls, torus: Torus, terms: Iterable) -> "Poly":
        """Sum of monomials given as exponent triples; pairs cancel over F2."""
        acc: set = set()
        for g in terms:
            g = torus.element(*g)
            acc ^= {g}
        return cls(torus, frozenset(acc))

    @classmethod
    def from_indices(cls, torus: Torus, indices: Iterable[int]) -> "Poly":
        return cls.from_terms(torus, (torus.element_at(int(i)) for i in indices))

    @classmethod
    def one(cls, torus: Torus) -> "Poly":
        return cls(torus, frozenset({GroupElement(0, 0, 0)}))

    @classmethod
    def parse(cls, text: str, torus: Torus) -> "Poly":
        return poly_parse(text, torus)

    @property
    def weight(self) -> int:
        return len(self.terms)

    def indices(self) -> np.ndarray:
        """Sorted element indices of the terms."""
        return np.array(sorted(element_index(g, self.torus) for g in self.terms), dtype=np.int64)

    def transpose(self) -> "Poly":
        return poly_transpose(self)

    @property
    def T(self) -> "Poly":
        return poly_transpose(self)

    def translate(self, g) -> "Poly":
        return self * Poly.from_terms(self.torus, [g])

    def to_matrix(self) -> BitMatrix:
        return poly_to_matrix(self)

    def _check(self, other: "Poly"):
        if not isinstance(other, Poly):
            return NotImplemented
        if other.torus != self.torus:
            raise ValueError(f"torus mismatch: {self.torus} vs {other.torus}")
        return None

    def __add__(self, other: "Poly") -> "Poly":
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Poly(self.torus, self.terms ^ other.terms)

    def __mul__(self, other: "Poly") -> "Poly":
        if self._check(other) is NotImplemented:
            return NotImplemented
        return poly_multiply(self, other)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "+".join(_monomial_str(g) for g in sorted(self.terms, key=lambda g: element_index(g, self.torus)))


def _monomial_str(g: GroupElement) -> str:
    if g == (0, 0, 0):
        return "1"
    out = []
    for sym, e in zip("xyz", g):
        if e == 1:
            out.append(sym)
        elif e > 1:
            out.append(f"{sym}{e}")
    return "".join(out)


def poly_parse(s: str, t: Torus) -> Poly:
    """Parse ``1+y2z4+xyz5`` style text (``x^3`` also accepted, ``0`` = empty)."""
    text = re.sub(r"\s+", "", s)
    if not text:
        raise ParseError("empty polynomial")
    if text == "0":
        return Poly(t, frozenset())
    acc: set = set()
    for term in text.split("+"):
        if not term:
            raise ParseError(f"empty term in {s!r}")
        acc ^= {_parse_term(term, t)}
    return Poly(t, frozenset(acc))


def poly_transpose(p: Poly) -> Poly:
    t = p.torus
    return Poly(t, frozenset(t.element(-g.a, -g.b, -g.c) for g in p.terms))


def poly_multiply(p: Poly, q: Poly) -> Poly:
    if p.torus != q.torus:
        raise ValueError(f"torus mismatch: {p.torus} vs {q.torus}")
    t = p.torus
    acc: set = set()
    for g in p.terms:
        for h in q.terms:
            acc ^= {t.element(g.a + h.a, g.b + h.b, g.c + h.c)}
    return Poly(t, frozenset(acc))


def poly_to_matrix(p: Poly) -> BitMatrix:
    """Permutation-sum lift: row i has a 1 in column index(g_i + term)."""
    t = p.torus
    N = t.order
    dense = np.zeros((N, N), dtype=np.uint8)
    idx = p.indices()
    if idx.size:
        dense[np.arange(N)[:, None], t.addition_table[:, idx]] = 1
    return BitMatrix.from_dense(dense)
