"""numba implementations of the hot kernels.

Every function here has a twin with the same signature and bit-identical
output in ``_numpy_kernels``. Kernels are ``nogil`` so the chunked drivers can
fan them out over a thread pool.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from . import _common as C

_U1 = np.uint64(1)
_GOLDEN = np.uint64(C.GOLDEN)
_MIX1 = np.uint64(C.MIX1)
_MIX2 = np.uint64(C.MIX2)
_HASH_SEED = np.uint64(C.HASH_SEED)
_STREAM_IS = np.uint64(C.STREAM_IS)
_STREAM_SHOTS = np.uint64(C.STREAM_SHOTS)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_M55 = np.uint64(0x5555555555555555)
_M33 = np.uint64(0x3333333333333333)
_M0F = np.uint64(0x0F0F0F0F0F0F0F0F)
_M01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)
_INV_2_53 = C.INV_2_53

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(**_opts)
def stream_key(seed, stream, index):
    return mix64(mix64(mix64(np.uint64(seed)) + np.uint64(stream)) + np.uint64(index))


@njit(**_opts)
def popcount64(x):
    x = x - ((x >> _S1) & _M55)
    x = (x & _M33) + ((x >> _S2) & _M33)
    x = (x + (x >> _S4)) & _M0F
    return (x * _M01) >> _S56


@njit(**_opts)
def _bit(c):
    return _U1 << np.uint64(c & 63)


# --------------------------------------------------------------------------
# GF(2) elimination


@njit(**_opts)
def rref_packed(words, pivot_limit):
    """Fully reduce packed rows in place; only columns < pivot_limit pivot."""
    rows, nw = words.shape
    pivots = np.empty(min(rows, pivot_limit), dtype=np.int64)
    r = 0
    for c in range(pivot_limit):
        if r == rows:
            break
        w = c >> 6
        bit = _bit(c)
        p = -1
        for i in range(r, rows):
            if words[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for j in range(w, nw):
                t = words[p, j]
                words[p, j] = words[r, j]
                words[r, j] = t
        for i in range(rows):
            if i != r and (words[i, w] & bit):
                for j in range(w, nw):
                    words[i, j] ^= words[r, j]
        pivots[r] = c
        r += 1
    return pivots[:r].copy()


# --------------------------------------------------------------------------
# search support: k of many (A, B) pairs, canonical orbit keys


@njit(**_opts)
def _rank_inplace(words, ncols):
    return rref_packed(words, ncols).shape[0]


@njit(**_opts)
def batch_pair_k(add, neg, a_idx, b_idx):
    npairs = a_idx.shape[0]
    N = add.shape[0]
    n = 2 * N
    nw = (n + 63) >> 6
    out = np.empty(npairs, dtype=np.int64)
    hx = np.zeros((N, nw), dtype=np.uint64)
    hz = np.zeros((N, nw), dtype=np.uint64)
    for p in range(npairs):
        hx[:, :] = 0
        hz[:, :] = 0
        for i in range(N):
            for t in range(a_idx.shape[1]):
                c = add[i, a_idx[p, t]]
                hx[i, c >> 6] ^= _bit(c)
                c = N + add[i, neg[a_idx[p, t]]]
                hz[i, c >> 6] ^= _bit(c)
            for t in range(b_idx.shape[1]):
                c = N + add[i, b_idx[p, t]]
                hx[i, c >> 6] ^= _bit(c)
                c = add[i, neg[b_idx[p, t]]]
                hz[i, c >> 6] ^= _bit(c)
        out[p] = n - _rank_inplace(hx, n) - _rank_inplace(hz, n)
    return out


@njit(**_opts)
def _lex_less(a, b):
    for i in range(a.shape[0]):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


@njit(**_opts)
def _canon_poly(add, neg, terms, out):
    w = terms.shape[0]
    cand = np.empty(w, dtype=np.int64)
    for ti in range(w):
        shift = neg[terms[ti]]
        for j in range(w):
            cand[j] = add[terms[j], shift]
        cand.sort()
        if ti == 0 or _lex_less(cand, out):
            out[:] = cand


@njit(**_opts)
def canonical_keys(add, neg, a_idx, b_idx):
    """Orbit-minimal key ``(len(P), P..., Q...)`` of every pair, plus a flag
    telling whether B is a translate of the transpose of A."""
    npairs = a_idx.shape[0]
    wa = a_idx.shape[1]
    wb = b_idx.shape[1]
    L = 1 + wa + wb
    keys = np.empty((npairs, L), dtype=np.int64)
    tlike = np.zeros(npairs, dtype=np.bool_)
    ca = np.empty(wa, dtype=np.int64)
    cb = np.empty(wb, dtype=np.int64)
    cat = np.empty(wa, dtype=np.int64)
    cbt = np.empty(wb, dtype=np.int64)
    ta = np.empty(wa, dtype=np.int64)
    tb = np.empty(wb, dtype=np.int64)
    key = np.empty(L, dtype=np.int64)
    for p in range(npairs):
        for j in range(wa):
            ta[j] = neg[a_idx[p, j]]
        for j in range(wb):
            tb[j] = neg[b_idx[p, j]]
        _canon_poly(add, neg, a_idx[p], ca)
        _canon_poly(add, neg, b_idx[p], cb)
        _canon_poly(add, neg, ta, cat)
        _canon_poly(add, neg, tb, cbt)
        if wa == wb:
            same = True
            for j in range(wa):
                if cb[j] != cat[j]:
                    same = False
                    break
            tlike[p] = same
        for v in range(4):
            if v == 0:
                first, second = ca, cb
            elif v == 1:
                first, second = cb, ca
            elif v == 2:
                first, second = cat, cbt
            else:
                first, second = cbt, cat
            key[0] = first.shape[0]
            key[1:1 + first.shape[0]] = first
            key[1 + first.shape[0]:] = second
            if v == 0 or _lex_less(key, keys[p]):
                keys[p, :] = key
    return keys, tlike


# --------------------------------------------------------------------------
# randomized information-set sampling


@njit(**_opts)
def _support_less(a, b):
    """Lexicographic order on sorted supports of two dense 0/1 vectors."""
    for j in range(a.shape[0]):
        if a[j] != b[j]:
            return a[j] == 1
    return False


@njit(**_opts)
def random_is(gen, sig, start, stop, seed):
    """Lowest-weight row with nonzero signature seen over iterations
    [start, stop). Returns ``(weight, dense witness)``; weight = n + 1 if none."""
    r, n = gen.shape
    g = sig.shape[1]
    nwn = (n + 63) >> 6
    nwg = (g + 63) >> 6
    nw = nwn + nwg
    words = np.empty((r, nw), dtype=np.uint64)
    keys = np.empty(n, dtype=np.uint64)
    best_w = n + 1
    best = np.zeros(n, dtype=np.uint8)
    cand = np.zeros(n, dtype=np.uint8)
    for it in range(start, stop):
        state = stream_key(seed, _STREAM_IS, it)
        for j in range(n):
            state += _GOLDEN
            keys[j] = mix64(state)
        perm = np.argsort(keys, kind="mergesort")
        words[:, :] = 0
        for i in range(r):
            for j in range(n):
                if gen[i, perm[j]]:
                    words[i, j >> 6] |= _bit(j)
            for q in range(g):
                if sig[i, q]:
                    words[i, nwn + (q >> 6)] |= _bit(q)
        piv = rref_packed(words, n)
        for i in range(piv.shape[0]):
            nontrivial = False
            for j in range(nwn, nw):
                if words[i, j] != 0:
                    nontrivial = True
                    break
            if not nontrivial:
                continue
            wt = 0
            for j in range(nwn):
                wt += popcount64(words[i, j])
            if wt > best_w:
                continue
            cand[:] = 0
            for j in range(n):
                if words[i, j >> 6] & _bit(j):
                    cand[perm[j]] = 1
            if wt < best_w or _support_less(cand, best):
                best_w = wt
                best[:] = cand
    return best_w, best


# --------------------------------------------------------------------------
# meet-in-the-middle low-weight logical search


@njit(**_opts)
def _hash_row(row):
    h = _HASH_SEED
    for j in range(row.shape[0]):
        h = mix64(h ^ row[j])
    return h


@njit(**_opts)
def _unrank_colex(rank, k, binom, out):
    """k-subset of {0, 1, ...} with the given colex rank."""
    for i in range(k - 1, -1, -1):
        c = i
        while binom[c + 1, i + 1] <= rank:
            c += 1
        out[i] = c
        rank -= binom[c, i + 1]


@njit(**_opts)
def _next_colex(c, m):
    k = c.shape[0]
    for i in range(k):
        limit = c[i + 1] if i + 1 < k else m
        if c[i] + 1 < limit:
            c[i] += 1
            for j in range(i):
                c[j] = j
            return True
    return False


@njit(**_opts)
def mitm_weight(syn, sig, anchor, w, binom):
    """Find weight-w vectors whose support starts at ``anchor``, with zero
    syndrome and nonzero signature. Returns ``(status, support)`` where the
    support is the lexicographically smallest hit."""
    n, sw = syn.shape
    gw = sig.shape[1]
    best = np.zeros(w, dtype=np.int64)
    found = False
    m = n - anchor - 1
    r = w - 1
    w1 = r // 2
    w2 = r - w1
    if w2 > m:
        return C.NOT_FOUND, best
    base = anchor + 1
    count1 = binom[m, w1]
    hashes = np.empty(count1, dtype=np.uint64)
    acc = np.empty(sw, dtype=np.uint64)
    c1 = np.arange(w1)
    for idx in range(count1):
        acc[:] = syn[anchor]
        for t in range(w1):
            for j in range(sw):
                acc[j] ^= syn[base + c1[t], j]
        hashes[idx] = _hash_row(acc)
        if w1 > 0:
            _next_colex(c1, m)
    order = np.argsort(hashes)
    sorted_h = hashes[order]

    c2 = np.arange(w2)
    key2 = np.empty(sw, dtype=np.uint64)
    s1 = np.empty(max(w1, 1), dtype=np.int64)
    sg = np.empty(gw, dtype=np.uint64)
    cand = np.empty(w, dtype=np.int64)
    more = True
    while more:
        key2[:] = 0
        for t in range(w2):
            for j in range(sw):
                key2[j] ^= syn[base + c2[t], j]
        h = _hash_row(key2)
        pos = np.searchsorted(sorted_h, h)
        while pos < count1 and sorted_h[pos] == h:
            idx = order[pos]
            pos += 1
            _unrank_colex(idx, w1, binom, s1)
            if w1 > 0 and s1[w1 - 1] >= c2[0]:
                continue
            acc[:] = syn[anchor]
            for t in range(w1):
                for j in range(sw):
                    acc[j] ^= syn[base + s1[t], j]
            equal = True
            for j in range(sw):
                if acc[j] != key2[j]:
                    equal = False
                    break
            if not equal:
                continue
            sg[:] = sig[anchor]
            for t in range(w1):
                for j in range(gw):
                    sg[j] ^= sig[base + s1[t], j]
            for t in range(w2):
                for j in range(gw):
                    sg[j] ^= sig[base + c2[t], j]
            nontrivial = False
            for j in range(gw):
                if sg[j] != 0:
                    nontrivial = True
                    break
            if not nontrivial:
                continue
            cand[0] = anchor
            for t in range(w1):
                cand[1 + t] = base + s1[t]
            for t in range(w2):
                cand[1 + w1 + t] = base + c2[t]
            if not found or _lex_less(cand, best):
                best[:] = cand
                found = True
        more = w2 > 0 and _next_colex(c2, m)
    return (C.FOUND if found else C.NOT_FOUND), best


# --------------------------------------------------------------------------
# BP (normalized min-sum, flooding) + OSD


@njit(**_opts)
def _syndrome_matches(chk_ptr, edge_var, hard, syndrome):
    m = chk_ptr.shape[0] - 1
    for c in range(m):
        par = 0
        for e in range(chk_ptr[c], chk_ptr[c + 1]):
            par ^= hard[edge_var[e]]
        if par != syndrome[c]:
            return False
    return True


@njit(**_opts)
def bp_min_sum(chk_ptr, edge_var, var_ptr, var_edges, syndrome, prior, max_iter, scale):
    m = chk_ptr.shape[0] - 1
    n = prior.shape[0]
    E = edge_var.shape[0]
    q = np.empty(E, dtype=np.float64)
    rmsg = np.zeros(E, dtype=np.float64)
    llr = prior.copy()
    hard = np.zeros(n, dtype=np.uint8)
    for e in range(E):
        q[e] = prior[edge_var[e]]
    zero = True
    for c in range(m):
        if syndrome[c]:
            zero = False
            break
    if zero:
        return llr, hard, True, 0
    for it in range(1, max_iter + 1):
        for c in range(m):
            lo = chk_ptr[c]
            hi = chk_ptr[c + 1]
            if lo == hi:
                continue
            min1 = np.inf
            min2 = np.inf
            amin = -1
            sgn = np.int64(syndrome[c] & 1)
            for e in range(lo, hi):
                a = abs(q[e])
                if q[e] < 0.0:
                    sgn ^= 1
                if a < min1:
                    min2 = min1
                    min1 = a
                    amin = e
                elif a < min2:
                    min2 = a
            for e in range(lo, hi):
                mag = min2 if e == amin else min1
                neg = sgn ^ (1 if q[e] < 0.0 else 0)
                rmsg[e] = scale * mag * (-1.0 if neg else 1.0)
        for v in range(n):
            acc = 0.0
            for k in range(var_ptr[v], var_ptr[v + 1]):
                acc += rmsg[var_edges[k]]
            llr[v] = prior[v] + acc
            hard[v] = 1 if llr[v] < 0.0 else 0
        if _syndrome_matches(chk_ptr, edge_var, hard, syndrome):
            return llr, hard, True, it
        for e in range(E):
            q[e] = llr[edge_var[e]] - rmsg[e]
    return llr, hard, False, max_iter


@njit(**_opts)
def osd(h, syndrome, llr, cost, order, method):
    """Ordered-statistics post-processing. method 0 = OSD-0, 1 = combination
    sweep of the given order. Returns ``(correction, consistent)``."""
    m, n = h.shape
    perm = np.argsort(llr, kind="mergesort")
    nw = (n + 1 + 63) >> 6
    words = np.zeros((m, nw), dtype=np.uint64)
    for i in range(m):
        for j in range(n):
            if h[i, perm[j]]:
                words[i, j >> 6] |= _bit(j)
        if syndrome[i]:
            words[i, n >> 6] |= _bit(n)
    piv = rref_packed(words, n)
    rank = piv.shape[0]
    aw = n >> 6
    ab = _bit(n)
    consistent = True
    for i in range(rank, m):
        if words[i, aw] & ab:
            consistent = False
    base = np.zeros(n, dtype=np.uint8)
    for i in range(rank):
        if words[i, aw] & ab:
            base[piv[i]] = 1
    best = base.copy()
    if method == 1 and rank < n:
        cperm = np.empty(n, dtype=np.float64)
        for j in range(n):
            cperm[j] = cost[perm[j]]
        is_piv = np.zeros(n, dtype=np.bool_)
        for i in range(rank):
            is_piv[piv[i]] = True
        free = np.empty(n - rank, dtype=np.int64)
        f = 0
        for j in range(n):
            if not is_piv[j]:
                free[f] = j
                f += 1
        best_cost = 0.0
        for j in range(n):
            if best[j]:
                best_cost += cperm[j]
        cand = np.empty(n, dtype=np.uint8)
        lam = min(order, n - rank)
        n1 = n - rank
        total = n1 + lam * (lam - 1) // 2
        t1 = 0
        t2 = 0
        for ci in range(total):
            cand[:] = base
            if ci < n1:
                a = free[ci]
                cand[a] ^= 1
                for i in range(rank):
                    if words[i, a >> 6] & _bit(a):
                        cand[piv[i]] ^= 1
            else:
                if ci == n1:
                    t1 = 0
                    t2 = 1
                a = free[t1]
                b = free[t2]
                cand[a] ^= 1
                cand[b] ^= 1
                for i in range(rank):
                    x = 0
                    if words[i, a >> 6] & _bit(a):
                        x ^= 1
                    if words[i, b >> 6] & _bit(b):
                        x ^= 1
                    if x:
                        cand[piv[i]] ^= 1
                t2 += 1
                if t2 == lam:
                    t1 += 1
                    t2 = t1 + 1
            c = 0.0
            for j in range(n):
                if cand[j]:
                    c += cperm[j]
            if c < best_cost:
                best_cost = c
                best[:] = cand
    out = np.zeros(n, dtype=np.uint8)
    for j in range(n):
        out[perm[j]] = best[j]
    return out, consistent


@njit(**_opts)
def _decode_sector(h, chk_ptr, edge_var, var_ptr, var_edges, syndrome, prior, cost,
                   max_iter, scale, osd_order, osd_method, osd_always):
    llr, hard, conv, _ = bp_min_sum(chk_ptr, edge_var, var_ptr, var_edges, syndrome,
                                    prior, max_iter, scale)
    if conv and not osd_always:
        return hard
    corr, _ = osd(h, syndrome, llr, cost, osd_order, osd_method)
    return corr


@njit(**_opts)
def _sector_fails(err, corr, sigw):
    n, gw = sigw.shape
    for j in range(gw):
        acc = np.uint64(0)
        for v in range(n):
            if err[v] ^ corr[v]:
                acc ^= sigw[v, j]
        if acc != 0:
            return True
    return False


@njit(**_opts)
def simulate_shots(hx, hz, hx_edges, hz_edges, sig_xerr, sig_zerr, t1, t2, p,
                   prior_x, prior_z, seed, stream, start, count,
                   max_iter, scale, osd_order, osd_method, osd_always):
    """Code-capacity depolarizing trials ``start .. start+count-1``.

    Returns one uint8 per shot: bit 0 = X-sector failure, bit 1 = Z-sector.
    """
    n = hx.shape[1]
    mx = hx.shape[0]
    mz = hz.shape[0]
    xp, xe, xvp, xve = hx_edges
    zp, ze, zvp, zve = hz_edges
    out = np.zeros(count, dtype=np.uint8)
    ex = np.empty(n, dtype=np.uint8)
    ez = np.empty(n, dtype=np.uint8)
    sx = np.empty(mz, dtype=np.uint8)
    sz = np.empty(mx, dtype=np.uint8)
    for s in range(count):
        state = stream_key(seed, _STREAM_SHOTS + np.uint64(stream), start + s)
        for v in range(n):
            state += _GOLDEN
            u = np.float64(mix64(state) >> _S11) * _INV_2_53
            ex[v] = 1 if (u < t1 or (u >= t2 and u < p)) else 0
            ez[v] = 1 if (u >= t1 and u < p) else 0
        flag = 0
        # X errors are caught by H_Z and judged against the Z logicals
        anyx = False
        for c in range(mz):
            par = 0
            for e in range(zp[c], zp[c + 1]):
                par ^= ex[ze[e]]
            sx[c] = par
            if par:
                anyx = True
        if anyx:
            corr = _decode_sector(hz, zp, ze, zvp, zve, sx, prior_x, prior_x,
                                  max_iter, scale, osd_order, osd_method, osd_always)
        else:
            corr = np.zeros(n, dtype=np.uint8)
        if _sector_fails(ex, corr, sig_xerr):
            flag |= 1
        anyz = False
        for c in range(mx):
            par = 0
            for e in range(xp[c], xp[c + 1]):
                par ^= ez[xe[e]]
            sz[c] = par
            if par:
                anyz = True
        if anyz:
            corr = _decode_sector(hx, xp, xe, xvp, xve, sz, prior_z, prior_z,
                                  max_iter, scale, osd_order, osd_method, osd_always)
        else:
            corr = np.zeros(n, dtype=np.uint8)
        if _sector_fails(ez, corr, sig_zerr):
            flag |= 2
        out[s] = flag
    return out


@njit(**_opts)
def uniforms(seed, stream, start, count, n):
    """The per-shot uniforms used by ``simulate_shots`` (for testing)."""
    out = np.empty((count, n), dtype=np.float64)
    for s in range(count):
        state = stream_key(seed, _STREAM_SHOTS + np.uint64(stream), start + s)
        for v in range(n):
            state += _GOLDEN
            out[s, v] = np.float64(mix64(state) >> _S11) * _INV_2_53
    return out
