"""Pure-numpy fallback kernels.

Same signatures and bit-identical results as ``_numba_kernels``; loops are
vectorized across rows, edges or batch members where that is natural, and
left as Python loops elsewhere.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import _common as C

_U = np.uint64
_GOLDEN = _U(C.GOLDEN)
_MIX1 = _U(C.MIX1)
_MIX2 = _U(C.MIX2)


def mix64(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U(30))) * _MIX1
        z = (z ^ (z >> _U(27))) * _MIX2
    return z ^ (z >> _U(31))


def stream_key(seed, stream, index):
    with np.errstate(over="ignore"):
        a = mix64(_U(seed)) + _U(stream)
        b = mix64(a) + np.asarray(index, dtype=np.uint64)
    return mix64(b)


def _draws(keys: np.ndarray, n: int) -> np.ndarray:
    """n successive SplitMix64 outputs for each starting state in ``keys``."""
    steps = np.arange(1, n + 1, dtype=np.uint64) * _GOLDEN
    with np.errstate(over="ignore"):
        states = keys[:, None] + steps[None, :]
    return mix64(states)


def popcount64(x):
    return np.bitwise_count(np.asarray(x, dtype=np.uint64)).astype(np.uint64)


# --------------------------------------------------------------------------
# GF(2) elimination


def rref_packed(words, pivot_limit):
    rows = words.shape[0]
    pivots = []
    r = 0
    for c in range(pivot_limit):
        if r == rows:
            break
        w = c >> 6
        b = _U(c & 63)
        col = (words[r:, w] >> b) & _U(1)
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            words[[r, p], w:] = words[[p, r], w:]
        mask = ((words[:, w] >> b) & _U(1)).astype(bool)
        mask[r] = False
        if mask.any():
            words[mask, w:] ^= words[r, w:]
        pivots.append(c)
        r += 1
    return np.asarray(pivots, dtype=np.int64)


def _rref_batch(words, pivot_limit):
    """rref of a stack of matrices at once; returns the per-matrix rank.

    Every matrix in the batch has the same shape, and each is reduced exactly
    as ``rref_packed`` would reduce it on its own.
    """
    B, rows, _ = words.shape
    rank = np.zeros(B, dtype=np.int64)
    ar = np.arange(B)
    rix = np.arange(rows)
    for c in range(pivot_limit):
        w = c >> 6
        b = _U(c & 63)
        bits = ((words[:, :, w] >> b) & _U(1)).astype(bool)
        eligible = bits & (rix[None, :] >= rank[:, None])
        has = eligible.any(axis=1) & (rank < rows)
        if not has.any():
            continue
        p = np.argmax(eligible, axis=1)
        sel = ar[has]
        r = rank[has]
        ps = p[has]
        top = words[sel, r].copy()
        words[sel, r] = words[sel, ps]
        words[sel, ps] = top
        piv_rows = words[sel, r]
        bits = ((words[sel, :, w] >> b) & _U(1)).astype(bool)
        bits[np.arange(sel.size), r] = False
        words[sel] ^= np.where(bits[:, :, None], piv_rows[:, None, :], _U(0))
        rank[has] += 1
    return rank


# --------------------------------------------------------------------------
# search support


def _pack_rows(dense):
    m, n = dense.shape
    nw = C.words_for(n)
    padded = np.zeros((m, nw * 64), dtype=np.uint8)
    padded[:, :n] = dense
    return np.packbits(padded, axis=1, bitorder="little").view("<u8").astype(np.uint64)


def batch_pair_k(add, neg, a_idx, b_idx):
    N = add.shape[0]
    n = 2 * N
    out = np.empty(a_idx.shape[0], dtype=np.int64)
    rows = np.arange(N)[:, None]
    for p in range(a_idx.shape[0]):
        a = a_idx[p]
        b = b_idx[p]
        hx = np.zeros((N, n), dtype=np.uint8)
        hz = np.zeros((N, n), dtype=np.uint8)
        hx[rows, add[:, a]] ^= 1
        hx[rows, N + add[:, b]] ^= 1
        hz[rows, add[:, neg[b]]] ^= 1
        hz[rows, N + add[:, neg[a]]] ^= 1
        rx = rref_packed(_pack_rows(hx), n).size
        rz = rref_packed(_pack_rows(hz), n).size
        out[p] = n - rx - rz
    return out


def _lexmin_rows(cands):
    """Row-wise lexicographic minimum over axis 0 of a (V, P, L) stack."""
    best = cands[0].copy()
    for v in range(1, cands.shape[0]):
        cur = cands[v]
        diff = cur != best
        has = diff.any(axis=1)
        first = np.argmax(diff, axis=1)
        idx = np.arange(best.shape[0])
        less = has & (cur[idx, first] < best[idx, first])
        best[less] = cur[less]
    return best


def _canon_poly_batch(add, neg, terms):
    w = terms.shape[1]
    cands = np.empty((w,) + terms.shape, dtype=np.int64)
    for t in range(w):
        shift = neg[terms[:, t]]
        cands[t] = np.sort(add[terms, shift[:, None]], axis=1)
    return _lexmin_rows(cands)


def canonical_keys(add, neg, a_idx, b_idx):
    P, wa = a_idx.shape
    wb = b_idx.shape[1]
    ca = _canon_poly_batch(add, neg, a_idx)
    cb = _canon_poly_batch(add, neg, b_idx)
    cat = _canon_poly_batch(add, neg, neg[a_idx])
    cbt = _canon_poly_batch(add, neg, neg[b_idx])
    tlike = np.zeros(P, dtype=bool)
    if wa == wb:
        tlike = (cb == cat).all(axis=1)

    def key(first, second):
        lead = np.full((P, 1), first.shape[1], dtype=np.int64)
        return np.concatenate([lead, first, second], axis=1)

    variants = [key(ca, cb), key(cb, ca), key(cat, cbt), key(cbt, cat)]
    return _lexmin_rows(np.stack(variants)), tlike


# --------------------------------------------------------------------------
# randomized information-set sampling


def _support_less(a, b):
    diff = np.flatnonzero(a != b)
    return diff.size > 0 and a[diff[0]] == 1


def random_is(gen, sig, start, stop, seed, batch=256):
    r, n = gen.shape
    g = sig.shape[1]
    nwn = C.words_for(n)
    best_w = n + 1
    best = np.zeros(n, dtype=np.uint8)
    sig_packed = _pack_rows(sig) if g else np.zeros((r, 0), dtype=np.uint64)
    for lo in range(start, stop, batch):
        hi = min(stop, lo + batch)
        its = np.arange(lo, hi, dtype=np.uint64)
        keys = stream_key(seed, C.STREAM_IS, its)
        perms = np.argsort(_draws(keys, n), axis=1, kind="stable")
        B = hi - lo
        dense = gen[:, perms]  # (r, B, n)
        dense = np.transpose(dense, (1, 0, 2)).reshape(B * r, n)
        words = np.concatenate(
            [_pack_rows(dense).reshape(B, r, nwn), np.broadcast_to(sig_packed, (B, r, sig_packed.shape[1]))],
            axis=2,
        ).copy()
        rank = _rref_batch(words, n)
        nontrivial = (words[:, :, nwn:] != 0).any(axis=2)
        weights = np.bitwise_count(words[:, :, :nwn]).sum(axis=2).astype(np.int64)
        valid = nontrivial & (np.arange(r)[None, :] < rank[:, None])
        for bi in range(B):
            rows_ok = np.flatnonzero(valid[bi])
            for i in rows_ok:
                wt = int(weights[bi, i])
                if wt > best_w:
                    continue
                bits = np.unpackbits(words[bi, i, :nwn].view(np.uint8), bitorder="little")[:n]
                cand = np.zeros(n, dtype=np.uint8)
                cand[perms[bi]] = bits
                if wt < best_w or _support_less(cand, best):
                    best_w = wt
                    best = cand
    return best_w, best


# --------------------------------------------------------------------------
# meet-in-the-middle low-weight logical search


def _hash_rows(rows):
    h = np.full(rows.shape[0], C.HASH_SEED, dtype=np.uint64)
    for j in range(rows.shape[1]):
        h = mix64(h ^ rows[:, j])
    return h


def _combos(pool_size, k):
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(pool_size), k)),
        dtype=np.int64,
    )
    return flat.reshape(-1, k)


def mitm_weight(syn, sig, anchor, w, binom, chunk=1 << 18):
    n, sw = syn.shape
    best = np.zeros(w, dtype=np.int64)
    m = n - anchor - 1
    r = w - 1
    w1 = r // 2
    w2 = r - w1
    if w2 > m:
        return C.NOT_FOUND, best
    base = anchor + 1
    s1 = _combos(m, w1)
    key1 = np.bitwise_xor.reduce(syn[base + s1], axis=1) if w1 else np.zeros((1, sw), np.uint64)
    key1 = key1 ^ syn[anchor]
    sig1 = np.bitwise_xor.reduce(sig[base + s1], axis=1) if w1 else np.zeros((1, sig.shape[1]), np.uint64)
    sig1 = sig1 ^ sig[anchor]
    max1 = s1[:, -1] if w1 else np.full(1, -1, dtype=np.int64)
    h1 = _hash_rows(key1)
    order = np.argsort(h1)
    sorted_h = h1[order]

    s2_all = _combos(m, w2)
    hits = []
    for lo in range(0, s2_all.shape[0], chunk):
        s2 = s2_all[lo:lo + chunk]
        key2 = np.bitwise_xor.reduce(syn[base + s2], axis=1) if w2 else np.zeros((1, sw), np.uint64)
        h2 = _hash_rows(key2)
        left = np.searchsorted(sorted_h, h2, side="left")
        right = np.searchsorted(sorted_h, h2, side="right")
        counts = right - left
        if not counts.any():
            continue
        which2 = np.repeat(np.arange(s2.shape[0]), counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        which1 = order[np.repeat(left, counts) + offs]
        first2 = s2[which2, 0] if w2 else np.full(which2.size, m, dtype=np.int64)
        ok = max1[which1] < first2
        ok &= (key1[which1] == key2[which2]).all(axis=1)
        sig2 = np.bitwise_xor.reduce(sig[base + s2[which2]], axis=1) if w2 else 0
        ok &= ((sig1[which1] ^ sig2) != 0).any(axis=1)
        if ok.any():
            sup = np.concatenate(
                [np.full((ok.sum(), 1), anchor), base + s1[which1[ok]], base + s2[which2[ok]]], axis=1
            )
            hits.append(sup)
    if not hits:
        return C.NOT_FOUND, best
    sup = np.concatenate(hits)
    idx = np.lexsort(sup.T[::-1])[0]
    return C.FOUND, sup[idx].astype(np.int64)


# --------------------------------------------------------------------------
# BP (normalized min-sum, flooding) + OSD


def _syndrome_of(chk_ptr, edge_var, hard):
    m = chk_ptr.shape[0] - 1
    chk = np.repeat(np.arange(m), np.diff(chk_ptr))
    return (np.bincount(chk, weights=hard[edge_var], minlength=m).astype(np.int64) & 1).astype(np.uint8)


def bp_min_sum(chk_ptr, edge_var, var_ptr, var_edges, syndrome, prior, max_iter, scale):
    m = chk_ptr.shape[0] - 1
    n = prior.shape[0]
    llr = prior.copy()
    hard = np.zeros(n, dtype=np.uint8)
    if not np.any(syndrome):
        return llr, hard, True, 0
    q = prior[edge_var].copy()
    deg = np.diff(chk_ptr)
    nonempty = deg > 0
    starts = chk_ptr[:-1][nonempty]
    chk = np.repeat(np.arange(m), deg)
    syn = syndrome.astype(np.int64)
    for it in range(1, max_iter + 1):
        a = np.abs(q)
        negq = q < 0.0
        sgn = np.zeros(m, dtype=np.int64)
        sgn[nonempty] = np.add.reduceat(negq.astype(np.int64), starts)
        sgn = (sgn + syn) & 1
        min1 = np.full(m, np.inf)
        min1[nonempty] = np.minimum.reduceat(a, starts)
        is_min = np.flatnonzero(a == min1[chk])
        _, first = np.unique(chk[is_min], return_index=True)
        amin = is_min[first]
        a2 = a.copy()
        a2[amin] = np.inf
        min2 = np.full(m, np.inf)
        min2[nonempty] = np.minimum.reduceat(a2, starts)
        mag = min1[chk]
        mag[amin] = min2[chk[amin]]
        neg = (sgn[chk] ^ negq.astype(np.int64)).astype(bool)
        rmsg = scale * mag * np.where(neg, -1.0, 1.0)
        acc = np.bincount(edge_var, weights=rmsg, minlength=n)
        llr = prior + acc
        hard = (llr < 0.0).astype(np.uint8)
        if np.array_equal(_syndrome_of(chk_ptr, edge_var, hard), syndrome.astype(np.uint8)):
            return llr, hard, True, it
        q = llr[edge_var] - rmsg
    return llr, hard, False, max_iter


def osd(h, syndrome, llr, cost, order, method):
    m, n = h.shape
    perm = np.argsort(llr, kind="stable")
    dense = np.zeros((m, n + 1), dtype=np.uint8)
    dense[:, :n] = h[:, perm]
    dense[:, n] = syndrome
    words = _pack_rows(dense)
    piv = rref_packed(words, n)
    rank = piv.size
    red = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")[:, : n + 1]
    consistent = not red[rank:, n].any()
    base = np.zeros(n, dtype=np.uint8)
    base[piv] = red[:rank, n]
    best = base
    if method == 1 and rank < n:
        cperm = cost[perm]
        is_piv = np.zeros(n, dtype=bool)
        is_piv[piv] = True
        free = np.flatnonzero(~is_piv)
        lam = min(order, n - rank)
        flips = [(a,) for a in free] + [
            (free[i], free[j]) for i in range(lam) for j in range(i + 1, lam)
        ]
        cands = np.repeat(base[None, :], len(flips), axis=0)
        for ci, fl in enumerate(flips):
            col = np.zeros(rank, dtype=np.uint8)
            for a in fl:
                cands[ci, a] ^= 1
                col ^= red[:rank, a]
            cands[ci, piv] ^= col
        costs = np.cumsum(np.where(cands == 1, cperm[None, :], 0.0), axis=1)[:, -1]
        base_cost = np.cumsum(np.where(base == 1, cperm, 0.0))[-1]
        best_cost = base_cost
        for ci in range(len(flips)):
            if costs[ci] < best_cost:
                best_cost = costs[ci]
                best = cands[ci]
    out = np.zeros(n, dtype=np.uint8)
    out[perm] = best
    return out, bool(consistent)


def _decode_sector(h, edges, syndrome, prior, max_iter, scale, osd_order, osd_method, osd_always):
    llr, hard, conv, _ = bp_min_sum(*edges, syndrome, prior, max_iter, scale)
    if conv and not osd_always:
        return hard
    corr, _ = osd(h, syndrome, llr, prior, osd_order, osd_method)
    return corr


def _fails(err, corr, sigw):
    resid = (err ^ corr).astype(bool)
    return bool(np.bitwise_xor.reduce(sigw[resid], axis=0).any()) if resid.any() else False


def uniforms(seed, stream, start, count, n):
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        keys = stream_key(seed, _U(C.STREAM_SHOTS) + _U(stream), idx)
    return (_draws(keys, n) >> _U(11)).astype(np.float64) * C.INV_2_53


def simulate_shots(hx, hz, hx_edges, hz_edges, sig_xerr, sig_zerr, t1, t2, p,
                   prior_x, prior_z, seed, stream, start, count,
                   max_iter, scale, osd_order, osd_method, osd_always):
    n = hx.shape[1]
    u = uniforms(seed, stream, start, count, n)
    ex_all = ((u < t1) | ((u >= t2) & (u < p))).astype(np.uint8)
    ez_all = ((u >= t1) & (u < p)).astype(np.uint8)
    synx = (ex_all.astype(np.int64) @ hz.T.astype(np.int64) & 1).astype(np.uint8)
    synz = (ez_all.astype(np.int64) @ hx.T.astype(np.int64) & 1).astype(np.uint8)
    out = np.zeros(count, dtype=np.uint8)
    for s in range(count):
        flag = 0
        if synx[s].any():
            corr = _decode_sector(hz, hz_edges, synx[s], prior_x, max_iter, scale,
                                  osd_order, osd_method, osd_always)
            if _fails(ex_all[s], corr, sig_xerr):
                flag |= 1
        elif _fails(ex_all[s], np.zeros(n, np.uint8), sig_xerr):
            flag |= 1
        if synz[s].any():
            corr = _decode_sector(hx, hx_edges, synz[s], prior_z, max_iter, scale,
                                  osd_order, osd_method, osd_always)
            if _fails(ez_all[s], corr, sig_zerr):
                flag |= 2
        elif _fails(ez_all[s], np.zeros(n, np.uint8), sig_zerr):
            flag |= 2
        out[s] = flag
    return out
