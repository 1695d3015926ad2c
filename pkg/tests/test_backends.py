"""The numba kernels and the numpy fallback must agree bit for bit."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from itbcodes import kernels
from itbcodes.algebra import Torus
from itbcodes.code import signature_words
from itbcodes.distance import _ISRunner, _syndrome_columns
from itbcodes.linalg import _pack

from conftest import bundled

nb = kernels.load("numba")
npk = kernels.load("numpy")


@settings(max_examples=60)
@given(arrays(np.uint8, st.tuples(st.integers(1, 20), st.integers(1, 150)), elements=st.integers(0, 1)))
def test_rref(dense):
    w1 = _pack(dense)
    w2 = w1.copy()
    limit = dense.shape[1]
    p1 = nb.rref_packed(w1, limit)
    p2 = npk.rref_packed(w2, limit)
    assert list(p1) == list(p2)
    assert (w1 == w2).all()


@pytest.mark.parametrize("dims", [(2, 3, 7), (3, 3, 3), (2, 2, 3)])
def test_pair_kernels(dims):
    t = Torus(*dims)
    rng = np.random.default_rng(0)
    a = np.sort(rng.choice(t.order, (200, 3)), axis=1)
    b = np.sort(rng.choice(t.order, (200, 3)), axis=1)
    ok = (np.diff(a, axis=1) > 0).all(axis=1) & (np.diff(b, axis=1) > 0).all(axis=1)
    a, b = np.ascontiguousarray(a[ok]), np.ascontiguousarray(b[ok])
    add, neg = np.ascontiguousarray(t.addition_table), np.ascontiguousarray(t.negation)
    assert (nb.batch_pair_k(add, neg, a, b) == npk.batch_pair_k(add, neg, a, b)).all()
    k1, t1 = nb.canonical_keys(add, neg, a, b)
    k2, t2 = npk.canonical_keys(add, neg, a, b)
    assert (k1 == k2).all() and (t1 == t2).all()


@pytest.mark.parametrize("name,sector", [("54_8_6", "X"), ("84_6_10", "Z"), ("bb_72_12_6", "X")])
def test_random_is(name, sector):
    runner = _ISRunner(bundled(name), sector, 17, 1)
    w1, v1 = nb.random_is(runner.gen, runner.sig, 5, 400, runner.seed)
    w2, v2 = npk.random_is(runner.gen, runner.sig, 5, 400, runner.seed)
    assert w1 == w2 and (v1 == v2).all()


@pytest.mark.parametrize("name,sector,w", [("54_14_5", "X", 5), ("54_8_6", "Z", 6), ("54_8_6", "X", 4)])
def test_mitm(name, sector, w):
    code = bundled(name)
    syn, sig = _syndrome_columns(code, sector)
    binom = kernels.binom_table(code.n + 1, w + 1)
    for anchor in code.translation_anchors():
        s1, sup1 = nb.mitm_weight(syn, sig, anchor, w, binom)
        s2, sup2 = npk.mitm_weight(syn, sig, anchor, w, binom)
        assert s1 == s2
        if s1 == kernels.FOUND:
            assert list(sup1) == list(sup2)


def _decoder_inputs(seed, density):
    code = bundled("54_8_6")
    h = np.ascontiguousarray(code.hz_dense)
    rng = np.random.default_rng(seed)
    e = (rng.random(code.n) < density).astype(np.uint8)
    s = ((h.astype(np.int64) @ e) & 1).astype(np.uint8)
    prior = np.full(code.n, math.log((1 - 0.05) / 0.05))
    return h, kernels.build_edges(h), s, prior


@settings(max_examples=40)
@given(st.integers(0, 2**31), st.floats(0.01, 0.3))
def test_bp_and_osd(seed, density):
    h, edges, s, prior = _decoder_inputs(seed, density)
    r1 = nb.bp_min_sum(*edges, s, prior, 30, 0.625)
    r2 = npk.bp_min_sum(*edges, s, prior, 30, 0.625)
    assert (r1[0] == r2[0]).all() and (r1[1] == r2[1]).all() and r1[2:] == r2[2:]
    for method, order in ((0, 0), (1, 10)):
        c1 = nb.osd(h, s, r1[0], prior, order, method)
        c2 = npk.osd(h, s, r1[0], prior, order, method)
        assert (c1[0] == c2[0]).all() and c1[1] == c2[1]


def test_uniforms():
    assert (nb.uniforms(np.uint64(5), 3, 100, 50, 17) == npk.uniforms(np.uint64(5), 3, 100, 50, 17)).all()


@pytest.mark.parametrize("p", [0.02, 0.08])
def test_simulate_shots(p):
    code = bundled("54_8_6")
    hx, hz = np.ascontiguousarray(code.hx_dense), np.ascontiguousarray(code.hz_dense)
    prior = np.full(code.n, math.log((1 - 2 * p / 3) / (2 * p / 3)))
    args = (
        hx, hz, kernels.build_edges(hx), kernels.build_edges(hz),
        signature_words(code.logicals_z, code.n), signature_words(code.logicals_x, code.n),
        p / 3, 2 * p / 3, p, prior, prior.copy(), np.uint64(9), 1, 0, 300, 50, 0.625, 10, 1, False,
    )
    assert (nb.simulate_shots(*args) == npk.simulate_shots(*args)).all()


def test_forced_numpy_backend_end_to_end():
    env = dict(os.environ, ITBCODES_BACKEND="numpy")
    script = (
        "from itbcodes import kernels; from itbcodes.catalog import load_code;"
        "from itbcodes.distance import certify_distance, DistancePolicy;"
        "from itbcodes.montecarlo import run_code_capacity;"
        "assert kernels.BACKEND == 'numpy';"
        "c = load_code('54_8_6');"
        "print(certify_distance(c, DistancePolicy(is_iterations=500)).d,"
        " run_code_capacity(c, 0.05, 400, seed=3).failures)"
    )
    out = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True)
    from itbcodes.catalog import load_code
    from itbcodes.montecarlo import run_code_capacity

    expected = run_code_capacity(load_code("54_8_6"), 0.05, 400, seed=3).failures
    assert out.stdout.split() == ["6", str(expected)]


def test_bad_backend_env():
    env = dict(os.environ, ITBCODES_BACKEND="fortran")
    proc = subprocess.run([sys.executable, "-c", "import itbcodes"], env=env, capture_output=True, text=True)
    assert proc.returncode != 0 and "ITBCODES_BACKEND" in proc.stderr
