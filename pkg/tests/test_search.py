import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itbcodes import kernels
from itbcodes.algebra import Poly, Torus
from itbcodes.code import build_code
from itbcodes.search import (
    PairSpace,
    SearchHit,
    SearchSpec,
    canonical_form,
    canonical_key,
    enumerate_pairs,
    is_transpose_like,
    k6_divisibility_report,
    ord2,
    pair_count,
    run_search,
    validate_hit,
)


def test_pair_counts():
    assert pair_count(SearchSpec(Torus(3, 3, 3))) == math.comb(26, 2) ** 2 == 105_625
    assert pair_count(SearchSpec(Torus(2, 3, 7), normalize_identity=False)) == math.comb(42, 3) ** 2 == 131_790_400
    assert pair_count(SearchSpec(Torus(2, 3, 7), weight_a=1, weight_b=1)) == 1
    assert PairSpace(SearchSpec(Torus(3, 3, 3))).size == 105_625


def test_weight1_enumeration():
    t = Torus(2, 3, 7)
    pairs = list(enumerate_pairs(SearchSpec(t, weight_a=1, weight_b=1)))
    assert pairs == [(Poly.one(t), Poly.one(t))]


def test_enumeration_is_ordered_and_normalized():
    spec = SearchSpec(Torus(2, 2, 3))
    pairs = list(enumerate_pairs(spec))
    assert len(pairs) == pair_count(spec)
    assert all(0 in a.indices() and 0 in b.indices() for a, b in pairs)
    assert pairs == list(enumerate_pairs(spec))
    a_idx, b_idx = PairSpace(spec).indices(0, len(pairs))
    assert [tuple(a.indices()) for a, _ in pairs] == [tuple(r) for r in a_idx]
    assert [tuple(b.indices()) for _, b in pairs] == [tuple(r) for r in b_idx]


def test_spec_validation():
    with pytest.raises(ValueError):
        SearchSpec(Torus(2, 2, 2), weight_a=0)
    with pytest.raises(ValueError):
        SearchSpec(Torus(2, 2, 2), min_d=-1)
    with pytest.raises(ValueError):
        SearchSpec(Torus(10, 10, 3))


def test_ord2():
    assert ord2(7) == 3
    assert ord2(3) == 2
    assert ord2(1) == 1
    assert ord2(127) == 7
    for bad in (2, 0, -3):
        with pytest.raises(ValueError):
            ord2(bad)


@given(st.integers(0, 500))
def test_ord2_definition(h):
    m = 2 * h + 1
    r = ord2(m)
    assert pow(2, r, m) == 1 % m
    assert all(pow(2, s, m) != 1 for s in range(1, r)) or m == 1


@st.composite
def pairs_on_torus(draw):
    dims = draw(st.sampled_from([(2, 3, 7), (3, 3, 3), (2, 2, 3), (4, 4, 1), (2, 5, 7)]))
    t = Torus(*dims)
    idx = st.lists(st.integers(0, t.order - 1), min_size=3, max_size=3, unique=True)
    return t, Poly.from_indices(t, draw(idx)), Poly.from_indices(t, draw(idx)), draw(st.integers(0, t.order - 1)), draw(
        st.integers(0, t.order - 1)
    )


@settings(max_examples=200)
@given(pairs_on_torus())
def test_canonical_form_invariance(data):
    t, a, b, g, h = data
    cid = canonical_form(a, b)
    ga, hb = t.element_at(g), t.element_at(h)
    assert canonical_form(b, a) == cid
    assert canonical_form(a.translate(ga), b.translate(hb)) == cid
    assert canonical_form(a.T, b.T) == cid
    assert canonical_form(b.T.translate(ga), a.T) == cid


@settings(max_examples=40)
@given(pairs_on_torus())
def test_equivalent_pairs_have_equal_k(data):
    t, a, b, g, h = data
    k = build_code(t, a, b).k
    assert build_code(t, b, a).k == k
    assert build_code(t, a.T, b.T).k == k
    assert build_code(t, a.translate(t.element_at(g)), b.translate(t.element_at(h))).k == k


@settings(max_examples=100)
@given(pairs_on_torus())
def test_kernel_keys_match_python(data):
    t, a, b, _, _ = data
    keys, tlike = kernels.canonical_keys(
        np.ascontiguousarray(t.addition_table), np.ascontiguousarray(t.negation), a.indices()[None, :], b.indices()[None, :]
    )
    assert tuple(int(x) for x in keys[0]) == canonical_key(a, b)
    assert bool(tlike[0]) == is_transpose_like(a, b)


@settings(max_examples=50)
@given(pairs_on_torus())
def test_kernel_k_matches_build_code(data):
    t, a, b, _, _ = data
    ks = kernels.batch_pair_k(
        np.ascontiguousarray(t.addition_table), np.ascontiguousarray(t.negation), a.indices()[None, :], b.indices()[None, :]
    )
    assert int(ks[0]) == build_code(t, a, b).k


def test_transpose_like_detection():
    t = Torus(3, 3, 3)
    a = Poly.parse("1+x+y", t)
    assert is_transpose_like(a, a.T)
    assert is_transpose_like(a, a.T.translate(t.element(1, 2, 0)))
    assert not is_transpose_like(a, Poly.parse("1+xy+z", t))


@pytest.fixture(scope="module")
def hits_333():
    return run_search(SearchSpec(Torus(3, 3, 3), seed=0))


def test_333_contains_54_8_6(hits_333):
    assert any((h.n, h.k, h.d) == (54, 8, 6) and h.d_flag == "exact" for h in hits_333)


def test_333_hits_are_sound_and_sorted(hits_333):
    assert hits_333 == sorted(hits_333, key=SearchHit.sort_key)
    for h in hits_333[:: max(1, len(hits_333) // 40)]:
        assert validate_hit(h)
        assert h.k >= 1 and h.d_upper >= 4
        assert not is_transpose_like(h.a, h.b)


def test_333_has_no_k6(hits_333):
    rep = k6_divisibility_report(hits_333)
    assert rep["ok"] and rep["tori"]["3,3,3"]["k6"] == 0


def test_333_inequivalent_profiles_have_distinct_ids(hits_333):
    by_id = {}
    for h in hits_333:
        by_id.setdefault(h.canonical_id, set()).add((h.k, h.d_upper))
    assert all(len(v) == 1 for v in by_id.values())
    assert len({h.canonical_id for h in hits_333}) == len(hits_333)


def test_divisibility_report_shapes():
    assert k6_divisibility_report([]) == {"tori": {}, "violations": [], "ok": True}
    fake = {"torus": [3, 3, 3], "k": 6}
    rep = k6_divisibility_report([fake, {"torus": [2, 3, 7], "k": 6}])
    assert not rep["ok"] and rep["violations"] == [fake]
    assert rep["tori"]["2,3,7"]["seven_divides"]


def test_divisibility_on_237_range():
    spec = SearchSpec(Torus(2, 3, 7), pair_range=(0, 20_000), certify="none", seed=1)
    hits = run_search(spec)
    rep = k6_divisibility_report(hits)
    assert rep["ok"]
    assert rep["tori"]["2,3,7"]["k6"] > 0


def test_search_is_deterministic():
    spec = SearchSpec(Torus(2, 3, 5), pair_range=(0, 8000), seed=3)
    a = [h.to_dict() for h in run_search(spec)]
    b = [h.to_dict() for h in run_search(spec)]
    assert a == b and a


def test_checkpoint_resume(tmp_path):
    spec = SearchSpec(Torus(2, 3, 5), chunk=500, pair_range=(0, 6000), seed=2)
    fresh = [h.to_dict() for h in run_search(spec)]
    ck = tmp_path / "ck.jsonl"
    run_search(SearchSpec(Torus(2, 3, 5), chunk=500, pair_range=(0, 3000), seed=2, certify="none"), checkpoint=ck)
    lines = ck.read_text().splitlines()
    assert len(lines) == 6 and all(json.loads(ln)["type"] == "range" for ln in lines)
    # simulate an interrupted write
    with open(ck, "a") as fh:
        fh.write('{"type": "range", "lo": 3000, "hi"')
    resumed = [h.to_dict() for h in run_search(spec, checkpoint=ck)]
    assert resumed == fresh


def test_hit_round_trip(hits_333):
    h = hits_333[0]
    again = SearchHit.from_dict(json.loads(json.dumps(h.to_dict())))
    assert again.to_dict() == h.to_dict()


def _profiles(spec):
    hits = run_search(spec)
    return hits, {(h.n, h.k, h.d_upper) for h in hits}


def _compare_with_full(torus, **kw):
    base = dict(min_d=2, require_asymmetric=False, certify="none", **kw)
    norm, pn = _profiles(SearchSpec(torus, **base))
    full, pf = _profiles(SearchSpec(torus, normalize_identity=False, dedupe=False, **base))
    assert pn == pf
    rep = {h.canonical_id: (h.k, h.d_upper) for h in norm}
    assert set(rep) == {h.canonical_id for h in full}
    for h in full:
        assert rep[h.canonical_id][0] == h.k


def test_completeness_222():
    # every odd-weight element of F2[Z2^3] is a unit, so weight 3 gives k = 0
    for asym in (True, False):
        assert run_search(SearchSpec(Torus(2, 2, 2), min_d=1, require_asymmetric=asym)) == []
    _compare_with_full(Torus(2, 2, 2), weight_a=2, weight_b=2)


@pytest.mark.slow
def test_completeness_222_weight4():
    _compare_with_full(Torus(2, 2, 2), weight_a=4, weight_b=4)


@pytest.mark.slow
def test_completeness_223():
    _compare_with_full(Torus(2, 2, 3))
