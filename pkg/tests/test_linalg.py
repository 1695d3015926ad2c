import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from itbcodes.linalg import (
    BitMatrix,
    BitVector,
    in_row_space,
    inverse,
    kernel_basis,
    rank,
    read_alist,
    read_dense,
    rref,
    solve,
    vstack,
    write_alist,
    write_dense,
)
from oracles import gf2_matmul, gf2_rank, in_span

from conftest import bundled


@st.composite
def matrices(draw, max_rows=24, max_cols=80):
    r = draw(st.integers(0, max_rows))
    c = draw(st.integers(1, max_cols))
    return draw(arrays(np.uint8, (r, c), elements=st.integers(0, 1)))


def test_pad_bits_stay_zero():
    m = BitMatrix.from_dense(np.ones((3, 70), dtype=np.uint8))
    assert m.words.shape == (3, 2)
    assert int(m.words[0, 1]) == (1 << 6) - 1
    v = BitVector.from_dense(np.ones(65, dtype=np.uint8))
    assert v.weight() == 65


def test_rank_examples():
    assert rank(BitMatrix.identity(37)) == 37
    assert rank(BitMatrix.zeros(5, 9)) == 0
    assert rank(bundled("54_14_5").hx) == 20


def test_kernel_examples():
    assert kernel_basis(BitMatrix.identity(6)) == []
    (b,) = kernel_basis(BitMatrix.from_dense([[1, 1]]))
    assert b.support() == [0, 1]


@pytest.mark.parametrize("name", ["54_14_5", "54_8_6", "84_6_10", "128_20_8", "140_6_14", "196_6_12", "bb72", "bb144"])
def test_kernel_size_of_hx(name):
    code = bundled(name)
    nullity = len(kernel_basis(code.hx))
    assert nullity == code.n - gf2_rank(code.hx.to_dense())
    # ker(H_X) splits into rowspace(H_Z) plus k logical directions
    assert nullity == rank(code.hz) + code.k


def test_rref_examples():
    red, piv = rref(BitMatrix.from_dense([[1, 1], [1, 1]]))
    assert red.to_dense().tolist() == [[1, 1], [0, 0]]
    assert piv == [0]


def test_rank_vs_oracle_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        d = rng.integers(0, 2, (20, 40), dtype=np.uint8)
        red, piv = rref(BitMatrix.from_dense(d))
        assert len(piv) == gf2_rank(d)


@given(matrices())
def test_rref_properties(d):
    m = BitMatrix.from_dense(d)
    red, piv = rref(m)
    dense = red.to_dense()
    assert piv == sorted(set(piv))
    for i, c in enumerate(piv):
        assert dense[:, c].sum() == 1 and dense[i, c] == 1
    assert not dense[len(piv):].any()
    assert rref(red)[0] == red
    # row space preserved
    assert gf2_rank(np.vstack([d, dense])) == gf2_rank(d) == len(piv)


@given(matrices())
def test_rank_nullity(d):
    m = BitMatrix.from_dense(d)
    basis = kernel_basis(m)
    assert rank(m) + len(basis) == m.cols
    for b in basis:
        assert not (m @ b).any()
    if basis:
        assert gf2_rank(np.array([b.to_dense() for b in basis])) == len(basis)


@given(matrices())
def test_rank_transpose(d):
    m = BitMatrix.from_dense(d)
    assert rank(m) == rank(m.T)


@given(matrices(), st.data())
def test_in_row_space_matches_rank(d, data):
    m = BitMatrix.from_dense(d)
    v = data.draw(arrays(np.uint8, d.shape[1], elements=st.integers(0, 1)))
    bv = BitVector.from_dense(v)
    expected = rank(vstack([m, BitMatrix.from_dense(v[None, :])])) == rank(m)
    assert in_row_space(m, bv) == expected
    if d.shape[0]:
        assert in_row_space(m, bv) == in_span(d, v)


@given(matrices(), st.data())
def test_row_combinations_are_in_row_space(d, data):
    if d.shape[0] == 0:
        return
    coeffs = data.draw(arrays(np.uint8, d.shape[0], elements=st.integers(0, 1)))
    v = gf2_matmul(coeffs[None, :], d)[0]
    assert in_row_space(BitMatrix.from_dense(d), BitVector.from_dense(v))


def test_in_row_space_examples():
    c84 = bundled("84_6_10")
    assert in_row_space(c84.hx, BitVector.zeros(84))
    assert in_row_space(c84.hx, c84.hx.row(0))
    with pytest.raises(ValueError):
        in_row_space(c84.hx, BitVector.zeros(83))


def test_weight5_logical_of_54_14_5_not_in_row_space():
    from itbcodes.distance import random_is_upper_bound

    code = bundled("54_14_5")
    res = random_is_upper_bound(code, "X", 2000, seed=3)
    assert res.weight == 5
    assert not (code.hz @ res.witness).any()
    assert not in_row_space(code.hx, res.witness)


def test_solve_examples():
    s = BitVector.from_support(7, [1, 4])
    assert solve(BitMatrix.identity(7), s) == s
    m = bundled("54_8_6").hx
    e = solve(m, BitVector.zeros(m.rows))
    assert e is not None and not (m @ e).any()
    with pytest.raises(ValueError):
        solve(m, BitVector.zeros(m.rows + 1))


def test_solve_random_consistent():
    rng = np.random.default_rng(2)
    for _ in range(100):
        d = rng.integers(0, 2, (15, 30), dtype=np.uint8)
        e0 = rng.integers(0, 2, 30, dtype=np.uint8)
        m = BitMatrix.from_dense(d)
        s = BitVector.from_dense(gf2_matmul(d, e0))
        e = solve(m, s)
        assert e is not None and m @ e == s


def test_solve_inconsistent_returns_none():
    m = BitMatrix.from_dense([[1, 1], [1, 1]])
    assert solve(m, BitVector.from_dense([1, 0])) is None


@given(matrices(max_rows=12, max_cols=12))
def test_solve_returns_none_iff_outside_column_space(d):
    m = BitMatrix.from_dense(d)
    for s in np.eye(d.shape[0], dtype=np.uint8):
        e = solve(m, BitVector.from_dense(s))
        consistent = gf2_rank(np.hstack([d, s[:, None]])) == gf2_rank(d)
        assert (e is not None) == consistent
        if e is not None:
            assert (gf2_matmul(d, e.to_dense()) == s).all()


def test_inverse():
    rng = np.random.default_rng(4)
    done = 0
    while done < 10:
        d = rng.integers(0, 2, (9, 9), dtype=np.uint8)
        if gf2_rank(d) < 9:
            with pytest.raises(ValueError):
                inverse(BitMatrix.from_dense(d))
            continue
        inv = inverse(BitMatrix.from_dense(d))
        assert (gf2_matmul(d, inv.to_dense()) == np.eye(9)).all()
        done += 1


def test_bitvector_hex_round_trip():
    v = BitVector.from_support(130, [0, 63, 64, 129])
    assert BitVector.from_hex(v.to_hex(), 130) == v
    assert v.weight() == 4


@given(matrices(max_rows=10, max_cols=70))
def test_text_formats_round_trip(tmp_path_factory, d):
    m = BitMatrix.from_dense(d)
    if m.rows == 0:
        return
    tmp = tmp_path_factory.mktemp("mats")
    write_alist(m, tmp / "m.alist")
    write_dense(m, tmp / "m.txt")
    assert read_alist(tmp / "m.alist") == m
    assert read_dense(tmp / "m.txt") == m


def test_read_dense_rejects_junk(tmp_path):
    (tmp_path / "bad.txt").write_text("0120\n")
    with pytest.raises(ValueError):
        read_dense(tmp_path / "bad.txt")
