import dataclasses
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itbcodes.algebra import Poly, Torus, poly_transpose
from itbcodes.catalog import list_codes, load_record
from itbcodes.code import CodeError, build_code, code_from_matrices, code_from_strings, verify_css
from itbcodes.linalg import BitMatrix, BitVector, in_row_space, rank
from oracles import gf2_matmul, gf2_rank, in_span

from conftest import bundled

TABLE = {
    "84_6_10": (84, 6, 6),
    "140_6_14": (140, 6, 6),
    "196_6_12": (196, 6, 6),
    "54_8_6": (54, 8, 6),
    "54_14_5": (54, 14, 8),
    "128_20_8": (128, 20, 8),
    "bb_72_12_6": (72, 12, 6),
    "bb_144_12_12": (144, 12, 6),
}


def test_catalog_has_all_rows():
    assert set(TABLE) <= set(list_codes())


@pytest.mark.parametrize("name", sorted(TABLE))
def test_table_parameters(name):
    rec = load_record(name)
    code = code_from_strings(",".join(map(str, rec["torus"])), rec["a"], rec["b"])
    n, k, w = TABLE[name]
    assert (code.n, code.k, code.stabilizer_weight) == (n, k, w)
    report = verify_css(code)
    assert report.ok, report.details
    # independent rank oracle
    hx, hz = code.hx.to_dense(), code.hz.to_dense()
    assert n - gf2_rank(hx) - gf2_rank(hz) == k
    assert not gf2_matmul(hx, hz.T).any()


def test_bb72_from_bivariate_case():
    code = code_from_strings("6,6,1", "x3+y+y2", "y3+x+x2")
    assert (code.n, code.k) == (72, 12)


def test_self_dual_54():
    code = code_from_strings("3,3,3", "1+x+y+z")
    assert code.self_dual and (code.n, code.k) == (54, 14)
    assert rank(code.hx) == rank(code.hz)
    N = 27
    hx, hz = code.hx.to_dense(), code.hz.to_dense()
    # H_Z = (A | A^T) and H_X = (A | A^T): identical with this block convention
    assert (hx[:, :N] == hz[:, :N]).all() and (hx[:, N:] == hz[:, N:]).all()


@pytest.mark.parametrize("dims", ["2,2,2", "3,1,1", "2,3,7"])
def test_trivial_polys_give_k0(dims):
    code = code_from_strings(dims, "1", "1")
    assert code.k == 0
    assert code.logicals_x == () and code.logicals_z == ()
    assert verify_css(code).checks["logical_pairing"]


def test_build_errors():
    t = Torus(2, 2, 2)
    with pytest.raises(CodeError):
        build_code(t, Poly(t, frozenset()), Poly.one(t))
    with pytest.raises(CodeError):
        build_code(t, Poly.one(Torus(2, 1, 1)), Poly.one(t))


def test_corrupted_hx_fails_orthogonality():
    code = bundled("84_6_10")
    d = code.hx.to_dense().copy()
    d[0, 0] ^= 1
    bad = dataclasses.replace(code, hx=BitMatrix.from_dense(d))
    report = verify_css(bad)
    assert not report.checks["orthogonality"]
    assert not report.ok
    with pytest.raises(CodeError):
        code_from_matrices(BitMatrix.from_dense(d), code.hz)


def test_logicals_54_14_5():
    code = bundled("54_14_5")
    assert len(code.logicals_x) == len(code.logicals_z) == 14
    for v in code.logicals_x:
        assert not (code.hz @ v).any()
        assert not in_row_space(code.hx, v)
    for v in code.logicals_z:
        assert not (code.hx @ v).any()
        assert not in_row_space(code.hz, v)


@pytest.mark.parametrize("name", sorted(TABLE))
def test_pairing_is_identity(name):
    code = bundled(name)
    lx = np.array([v.to_dense() for v in code.logicals_x])
    lz = np.array([v.to_dense() for v in code.logicals_z])
    assert (gf2_matmul(lx, lz.T) == np.eye(code.k)).all()


def test_toy_code_logicals_brute_force(toy):
    assert (toy.n, toy.k) == (4, 2)
    hx, hz = toy.hx.to_dense(), toy.hz.to_dense()
    logical_x = []
    for bits in itertools.product((0, 1), repeat=4):
        v = np.array(bits)
        if not gf2_matmul(hz, v).any() and not in_span(hx, v):
            logical_x.append(bits)
    assert (1, 1, 0, 0) in logical_x
    assert min(sum(b) for b in logical_x) == 2
    for v in toy.logicals_x:
        assert tuple(v.to_dense()) in logical_x


@st.composite
def random_pairs(draw, max_order=30):
    l1 = draw(st.integers(1, 4))
    l2 = draw(st.integers(1, 4))
    l3 = draw(st.integers(1, max(1, max_order // (l1 * l2))))
    t = Torus(l1, l2, l3)
    idx = st.lists(st.integers(0, t.order - 1), min_size=1, max_size=4, unique=True)
    return t, Poly.from_indices(t, draw(idx)), Poly.from_indices(t, draw(idx))


@settings(max_examples=60)
@given(random_pairs())
def test_random_pairs_are_valid_css(tab):
    t, a, b = tab
    code = build_code(t, a, b)
    report = verify_css(code)
    assert report.ok, report.details
    assert code.n == 2 * t.order
    assert code.k == code.n - gf2_rank(code.hx.to_dense()) - gf2_rank(code.hz.to_dense())


@settings(max_examples=40)
@given(random_pairs(), st.integers(0, 10**6))
def test_k_invariant_under_swap_and_translation(tab, shift):
    t, a, b = tab
    k = build_code(t, a, b).k
    assert build_code(t, b, a).k == k
    g = t.element_at(shift % t.order)
    assert build_code(t, a.translate(g), b.translate(g)).k == k
    assert build_code(t, a.translate(g), b).k == k


@settings(max_examples=30)
@given(random_pairs())
def test_self_dual_ranks_match(tab):
    t, a, _ = tab
    code = build_code(t, a, poly_transpose(a))
    assert code.self_dual
    assert rank(code.hx) == rank(code.hz)
    assert code.k == code.n - 2 * rank(code.hx)


def test_record_round_trip():
    code = bundled("84_6_10")
    rec = code.to_record()
    again = code_from_strings(",".join(map(str, rec["torus"])), rec["a"], rec["b"])
    assert again.hx == code.hx and again.hz == code.hz
    assert rec["n"] == 84 and rec["k"] == 6
