"""Compiled inner loops of the compressor.

Queue access is dispatched on ``mode``: ``HF`` uses the dense table
``H = (P, L, F)`` over a ``u x u`` universe, ``LF`` the bounded hash queue
``Q`` from :mod:`rpair.lfqueue`. Both expose records through slot indices
into int32 ``P``/``L``/``F`` arrays, which keeps the replacement code shared.

``tp`` is the position arena. Every queued pair owns the interval
``tp[P:P+L]``, a superset of the positions where the pair currently starts
(for ``aa`` pairs: every position of a run of ``a`` except the last).
Frequencies count non-overlapping occurrences, greedily from the left.
"""
import numpy as np

from ._jit import leaf, njit
from .cluster import DENSE, HASHED, cluster_kernel
from .lfqueue import (ST_EVICTIONS, ST_MAXEVICT, lf_check, lf_decrease, lf_find, lf_insert,
                      lf_max, lf_remove, new_lf_state, pow2_at_least)
from .hfqueue import hf_max
from .pairs import pkey, unkey
from .sort import STACK, argsort_range, sort_range
from .text import build_text, extract, is_set, next_nb, pair_at, prev_nb, replace_at, sym

HF = 0
LF = 1

C_NEXT = 0
C_TPEND = 1
C_NRULES = 2
C_FLOOR = 3
C_CUTOFF = 4
C_COMPACTIONS = 5
C_SYNCS = 6
C_VIOLATIONS = 7
C_HFMAX = 8
C_MISMATCH = 9
C_REPLACED = 10
C_DECREASES = 11
C_FILL = 12
C_CHECK = 13
C_INSERT_MIN = 14
C_LEN = 16

DONE = 0
FLUSH = 1


@leaf
def _arrays(mode, H, Q):
    if mode == HF:
        return H[0], H[1], H[2]
    return Q[1], Q[2], Q[3]


@leaf
def _slot_pair(mode, u, Q, s):
    if mode == HF:
        return np.int64(s // u), np.int64(s % u)
    return unkey(Q[0][s])


@leaf
def _find(mode, H, u, Q, a, b):
    if mode == HF:
        if a >= u or b >= u:
            return -1
        s = a * u + b
        return s if H[2][s] > 0 else -1
    return lf_find(Q[0], pkey(a, b))


@leaf
def _remove(mode, H, Q, s):
    if mode == HF:
        H[0][s] = 0
        H[1][s] = 0
        H[2][s] = 0
    else:
        lf_remove(Q, s)


@leaf
def _decrease(mode, H, Q, s):
    if mode == HF:
        H[2][s] -= 1
        if H[2][s] <= 1:
            _remove(mode, H, Q, s)
            return False
        return True
    return lf_decrease(Q, s)


@leaf
def key_at(T, p):
    a, b, _ = pair_at(T, p)
    return pkey(a, b)


@leaf
def tighten(T, tp, start, length, a, b):
    """Keep only positions still starting ``ab``; returns the new length."""
    w = start
    for e in range(start, start + length):
        p = tp[e]
        if is_set(T, p):
            c, d, _ = pair_at(T, p)
            if c == a and d == b:
                tp[w] = p
                w += 1
    return w - start


@leaf
def greedy_count(T, tp, start, length):
    """Non-overlapping count of an ``aa`` pair over sorted run positions."""
    f = 0
    consumed = -1
    for i in range(start, start + length):
        p = tp[i]
        if p == consumed:
            consumed = -1
            continue
        f += 1
        consumed = next_nb(T, p)
    return f


@leaf
def pair_frequency(T, tp, start, length, key):
    a, b = unkey(key)
    if a != b:
        return length
    return greedy_count(T, tp, start, length)


@leaf
def _dec(T, tp, st, mode, H, u, Q, a, b):
    s = _find(mode, H, u, Q, a, b)
    if s < 0:
        return
    st[C_DECREASES] += 1
    if _decrease(mode, H, Q, s):
        P, L, F = _arrays(mode, H, Q)
        if 2 * F[s] < L[s]:
            L[s] = tighten(T, tp, P[s], L[s], a, b)
            st[C_SYNCS] += 1


@leaf
def compact(T, tp, st, mode, H, u, Q, pin_start, pin_len):
    """Tighten every live interval and pack the arena; returns the pinned range's new start."""
    P, L, F = _arrays(mode, H, Q)
    for s in range(F.shape[0]):
        if F[s] > 0 and L[s] > 0:
            p0 = P[s]
            P[s] = tp[p0]
            tp[p0] = -(s + 2)
    saved = 0
    if pin_len > 0:
        saved = tp[pin_start]
        tp[pin_start] = -1
    end = st[C_TPEND]
    r = 0
    w = 0
    new_pin = 0
    while r < end:
        v = tp[r]
        if v >= 0:
            r += 1
            continue
        if v == -1:
            new_pin = w
            tp[w] = saved
            for i in range(1, pin_len):
                tp[w + i] = tp[r + i]
            w += pin_len
            r += pin_len
            continue
        s = -v - 2
        length = L[s]
        a, b = _slot_pair(mode, u, Q, s)
        start = w
        tp[r] = P[s]
        for e in range(r, r + length):
            p = tp[e]
            if is_set(T, p):
                c, d, _ = pair_at(T, p)
                if c == a and d == b:
                    tp[w] = p
                    w += 1
        P[s] = start
        L[s] = w - start
        r += length
    st[C_TPEND] = w
    st[C_COMPACTIONS] += 1
    return new_pin


@leaf
def _run_length(T, p, c, forward):
    k = 1
    q = next_nb(T, p) if forward else prev_nb(T, p)
    while q >= 0 and sym(T, q) == c:
        k += 1
        q = next_nb(T, q) if forward else prev_nb(T, q)
    return k


@leaf
def _insert(mode, H, u, Q, key, p, length, f):
    if mode == HF:
        a, b = unkey(key)
        s = a * u + b
        H[0][s] = p
        H[1][s] = length
        H[2][s] = f
    else:
        lf_insert(Q, key, p, length, f)


@leaf
def process_pair(T, tp, st, mode, H, u, Q, CT, SEG, NEWP, R, s_ab, thr, steps):
    """Replace every occurrence of the pair in slot ``s_ab`` and queue the new pairs."""
    P, L, F = _arrays(mode, H, Q)
    a, b = _slot_pair(mode, u, Q, s_ab)
    p0 = np.int64(P[s_ab])
    ln = np.int64(L[s_ab])
    fab = np.int64(F[s_ab])
    _remove(mode, H, Q, s_ab)
    x = st[C_NEXT]
    st[C_NEXT] = x + 1
    r = st[C_NRULES]
    R[0][r] = a
    R[1][r] = b
    R[2][r] = fab
    R[3][r] = st[C_FILL]
    st[C_NRULES] = r + 1

    stack = Q[11]
    sort_range(tp, p0, p0 + ln, stack)
    cnt = 0
    for e in range(p0, p0 + ln):
        p = tp[e]
        if not is_set(T, p):
            continue
        c0, c1, j = pair_at(T, p)
        if c0 != a or c1 != b:
            continue
        xp = prev_nb(T, p)
        cx = sym(T, xp) if xp >= 0 else -1
        yp = next_nb(T, j)
        cy = sym(T, yp) if yp >= 0 else -1
        replace_at(T, p, j, x)
        tp[p0 + cnt] = p
        cnt += 1
        if xp >= 0 and cx != x:
            if cx != a:
                _dec(T, tp, st, mode, H, u, Q, cx, a)
            elif a != b and _run_length(T, xp, a, False) % 2 == 1:
                _dec(T, tp, st, mode, H, u, Q, a, a)
        if yp >= 0:
            if cy != b:
                _dec(T, tp, st, mode, H, u, Q, b, cy)
            elif a != b and _run_length(T, yp, b, True) % 2 == 1:
                _dec(T, tp, st, mode, H, u, Q, b, b)
    st[C_REPLACED] += cnt
    if cnt != fab:
        st[C_MISMATCH] += 1

    cmode, cu, ckeys, C1, C2 = CT
    sk, ss, sl, sslot = SEG
    nk, nP, nL, nF, order = NEWP
    nnew = 0

    # pairs cX: their positions are the left neighbours of the new symbols
    if st[C_TPEND] + cnt > tp.shape[0]:
        p0 = compact(T, tp, st, mode, H, u, Q, p0, cnt)
    rs = st[C_TPEND]
    m = 0
    for e in range(p0, p0 + cnt):
        xp = prev_nb(T, tp[e])
        if xp >= 0 and sym(T, xp) != x:
            tp[rs + m] = xp
            m += 1
    if m > 0:
        mm, nseg = cluster_kernel(tp, rs, rs + m, T, cmode, cu, ckeys, C1, C2, sk, ss, sl, sslot, steps)
        w = rs
        for g in range(nseg):
            f = sl[g]
            if f >= thr:
                src = rs + ss[g]
                if src != w:
                    for i in range(f):
                        tp[w + i] = tp[src + i]
                nk[nnew] = sk[g]
                nP[nnew] = w
                nL[nnew] = f
                nF[nnew] = f
                nnew += 1
                w += f
        st[C_TPEND] = w

    # pairs Xy: their positions are the new symbols themselves
    if cnt > 0:
        mm, nseg = cluster_kernel(tp, p0, p0 + cnt, T, cmode, cu, ckeys, C1, C2, sk, ss, sl, sslot, steps)
        for g in range(nseg):
            start = p0 + ss[g]
            length = sl[g]
            c, d = unkey(sk[g])
            if c == d:
                sort_range(tp, start, start + length, stack)
                f = greedy_count(T, tp, start, length)
            else:
                f = length
            if f >= thr:
                nk[nnew] = sk[g]
                nP[nnew] = start
                nL[nnew] = length
                nF[nnew] = f
                nnew += 1

    # queue new pairs in key order, which is the extraction order on ties
    for i in range(nnew):
        order[i] = i
    argsort_range(nk, order, 0, nnew, stack)
    for i in range(nnew):
        g = order[i]
        _insert(mode, H, u, Q, nk[g], nP[g], nL[g], nF[g])
    return cnt


@leaf
def check_records(mode, H, Q):
    """Number of live records violating F <= L <= 2F."""
    P, L, F = _arrays(mode, H, Q)
    bad = 0
    for s in range(F.shape[0]):
        f = F[s]
        if f > 0 and (L[s] < f or L[s] > 2 * f):
            bad += 1
    if mode == LF:
        bad += lf_check(Q)
    return bad


@leaf
def run_queue(T, tp, st, mode, H, u, Q, CT, SEG, NEWP, R, steps):
    """Extract and replace pairs until the rule buffer fills or the queue runs dry."""
    P, L, F = _arrays(mode, H, Q)
    cap = R[0].shape[0]
    while True:
        if st[C_NRULES] >= cap:
            return FLUSH
        if st[C_CHECK] != 0:
            st[C_VIOLATIONS] += check_records(mode, H, Q)
        if mode == HF:
            if st[C_NEXT] >= u:
                return DONE
            st[C_HFMAX] += 1
            s = hf_max(F, u)
            thr = st[C_CUTOFF]
            if s < 0 or F[s] < thr:
                return DONE
        else:
            thr = st[C_FLOOR]
            if Q[10][ST_MAXEVICT] + 1 > thr:
                thr = Q[10][ST_MAXEVICT] + 1
            if thr < 2:
                thr = 2
            s = lf_max(Q, thr)
            if s < 0:
                return DONE
            if st[C_INSERT_MIN] > thr:
                thr = st[C_INSERT_MIN]
        process_pair(T, tp, st, mode, H, u, Q, CT, SEG, NEWP, R, s, thr, steps)


@leaf
def count_pairs(T, sigma, cutoff, cnt_f, cnt_pos):
    """Count the byte pairs of a fresh text; returns how many reach ``cutoff``.

    The tables may be uninitialised: only entries of pairs present in the
    text are read, and those are cleared first.
    """
    cells = T[0]
    n = cells.shape[0]
    for i in range(n - 1):
        k = np.int64(cells[i]) * sigma + np.int64(cells[i + 1])
        cnt_f[k] = 0
        cnt_pos[k] = 0
    taken = False
    for i in range(n - 1):
        a = np.int64(cells[i])
        b = np.int64(cells[i + 1])
        k = a * sigma + b
        cnt_pos[k] += 1
        if a == b and taken:
            taken = False
        else:
            cnt_f[k] += 1
            taken = a == b
    hf = 0
    for i in range(n - 1):
        k = np.int64(cells[i]) * sigma + np.int64(cells[i + 1])
        if cnt_f[k] >= cutoff:
            cnt_f[k] = -cnt_f[k]
            hf += 1
    return hf


@leaf
def hf_list(T, sigma, cnt_f, cnt_pos, keys, freqs, lens):
    """Copy the pairs ``count_pairs`` flagged out of the dense count tables.

    Pairs come out in order of first occurrence, as ``a * sigma + b`` codes.
    """
    cells = T[0]
    n = cells.shape[0]
    h = 0
    for i in range(n - 1):
        k = np.int64(cells[i]) * sigma + np.int64(cells[i + 1])
        if cnt_f[k] < 0:
            keys[h] = k
            freqs[h] = -cnt_f[k]
            lens[h] = cnt_pos[k]
            cnt_f[k] = 0
            h += 1
    return h


@leaf
def load_hf(T, tp, st, H, u, sigma, keys, freqs, lens, h):
    """Queue the listed pairs, with their positions in ``tp``."""
    P, L, F = H
    off = 0
    for g in range(h):
        s = (keys[g] // sigma) * u + keys[g] % sigma
        P[s] = off
        L[s] = lens[g]
        F[s] = freqs[g]
        off += lens[g]
    cells = T[0]
    n = cells.shape[0]
    for i in range(n - 1):
        s = np.int64(cells[i]) * u + np.int64(cells[i + 1])
        if F[s] > 0:
            tp[P[s]] = i
            P[s] += 1
    for g in range(h):
        s = (keys[g] // sigma) * u + keys[g] % sigma
        P[s] -= L[s]
    st[C_TPEND] = off


RADIX = 10
BUCKETS = 1 << RADIX
# pending ranges: at most one level's buckets per digit of a 64-bit key
PENDING = BUCKETS * ((64 + RADIX - 1) // RADIX)


# ranges this short are finished by insertion sort on cached keys
SHORT = 48


@njit
def radix_scratch():
    """Counters, the pending-range stack and a key cache for ``sort_by_pair``."""
    return (np.empty(BUCKETS, dtype=np.int64), np.empty(BUCKETS, dtype=np.int64),
            np.empty(3 * PENDING, dtype=np.int32), np.empty(SHORT, dtype=np.int64))


def radix_scratch_bytes():
    return 2 * 8 * BUCKETS + 3 * 4 * PENDING + 8 * SHORT


@leaf
def _rkey(T, p, bits):
    # the pair key with the unused bits between its halves squeezed out
    k = key_at(T, p)
    return ((k >> 32) << (bits + 1)) | (k & 0xFFFFFFFF)


@leaf
def sort_by_pair(T, tp, lo, hi, nsym, RS, stack):
    """Sort ``tp[lo:hi]`` by pair key; order within a key is arbitrary.

    Most significant digit first radix sort, permuting in place. Keys are
    recomputed from the text on every look, so each level reads the key of
    each position about twice; a comparison sort would need one look per
    level of a much deeper recursion. ``nsym`` bounds every symbol.
    """
    cnt, nxt, pend, kbuf = RS
    bits = 1
    while (np.int64(1) << bits) < nsym:
        bits += 1
    total = 2 * bits + 1
    mask = BUCKETS - 1
    pend[0] = lo
    pend[1] = hi
    pend[2] = total - RADIX if total > RADIX else 0
    top = 1
    while top > 0:
        top -= 1
        l = np.int64(pend[3 * top])
        h = np.int64(pend[3 * top + 1])
        shift = np.int64(pend[3 * top + 2])
        if h - l <= SHORT:
            for i in range(l, h):
                v = tp[i]
                kv = _rkey(T, v, bits)
                j = i - 1
                while j >= l and kbuf[j - l] > kv:
                    tp[j + 1] = tp[j]
                    kbuf[j + 1 - l] = kbuf[j - l]
                    j -= 1
                tp[j + 1] = v
                kbuf[j + 1 - l] = kv
            continue
        for d in range(BUCKETS):
            cnt[d] = 0
        for i in range(l, h):
            cnt[(_rkey(T, tp[i], bits) >> shift) & mask] += 1
        at = l
        for d in range(BUCKETS):
            nxt[d] = at
            at += cnt[d]
            cnt[d] = at
        # cnt[d] is now the end of bucket d; cycle every misplaced entry home
        for d in range(BUCKETS):
            while nxt[d] < cnt[d]:
                v = tp[nxt[d]]
                e = (_rkey(T, v, bits) >> shift) & mask
                while e != d:
                    w = tp[nxt[e]]
                    tp[nxt[e]] = v
                    nxt[e] += 1
                    v = w
                    e = (_rkey(T, v, bits) >> shift) & mask
                tp[nxt[d]] = v
                nxt[d] += 1
        if shift > 0:
            down = shift - RADIX if shift > RADIX else 0
            start = l
            for d in range(BUCKETS):
                end = cnt[d]
                if end - start > 1:
                    pend[3 * top] = start
                    pend[3 * top + 1] = end
                    pend[3 * top + 2] = down
                    top += 1
                start = end


@leaf
def refill_scan(T, tp, hist, nsym, RS, stack):
    """Load every pair start into ``tp``, group by pair and histogram frequencies.

    Returns ``(m, max frequency)`` where ``tp[:m]`` holds the grouped
    positions, ascending within each group.
    """
    m = 0
    i = 0
    while True:
        j = next_nb(T, i)
        if j < 0:
            break
        tp[m] = i
        m += 1
        i = j
    sort_by_pair(T, tp, 0, m, nsym, RS, stack)
    top = 0
    last = hist.shape[0] - 1
    i = 0
    while i < m:
        k = key_at(T, tp[i])
        j = i + 1
        while j < m and key_at(T, tp[j]) == k:
            j += 1
        if j - i > 1:
            sort_range(tp, i, j, stack)
        f = pair_frequency(T, tp, i, j - i, k)
        if f >= 2:
            hist[f if f < last else last] += 1
            if f > top:
                top = f
        i = j
    return m, top


@leaf
def refill_load(T, tp, st, Q, m, thr, limit_at_thr):
    """Queue every grouped pair with frequency >= ``thr``, packing ``tp``.

    At most ``limit_at_thr`` pairs of frequency exactly ``thr`` are taken
    (smallest keys first). When that cuts pairs off, pairs created during
    the round are not queued either: they all have larger keys than the
    ones left out, so the next fill picks everything up in the right order.
    Returns the number of queued pairs.
    """
    w = 0
    i = 0
    loaded = 0
    at_thr = 0
    while i < m:
        k = key_at(T, tp[i])
        j = i + 1
        while j < m and key_at(T, tp[j]) == k:
            j += 1
        f = pair_frequency(T, tp, i, j - i, k)
        take = f >= thr
        if take and f == thr:
            take = at_thr < limit_at_thr
            at_thr += 1
        if take:
            if w != i:
                for e in range(j - i):
                    tp[w + e] = tp[i + e]
            lf_insert(Q, k, w, j - i, f)
            w += j - i
            loaded += 1
        i = j
    st[C_TPEND] = w
    st[C_FLOOR] = thr
    st[C_INSERT_MIN] = thr + 1 if at_thr > limit_at_thr else thr
    return loaded


@leaf
def threshold(hist, top, limit):
    """Fill threshold and how many pairs at exactly that frequency to load.

    The threshold is the lowest frequency >= 2 whose histogram tail holds at
    most ``limit`` pairs. If the top frequency alone holds more, only its
    first ``limit`` pairs (in key order) are loaded.
    """
    cum = 0
    f = top
    while f >= 2:
        if cum + hist[f] > limit:
            break
        cum += hist[f]
        f -= 1
    thr = f + 1
    if thr > top:
        return top, limit
    return thr, hist[thr] + 1


@njit
def cluster_slots(top):
    # a cluster call sees at most ``top`` distinct pairs; keep the load under 0.8
    return pow2_at_least(top + (top >> 2) + 1)


@njit
def _scratch(size):
    return (np.empty(size, dtype=np.int64), np.empty(size, dtype=np.int32),
            np.empty(size, dtype=np.int32), np.empty(size, dtype=np.int32))


@njit
def _newpairs(size):
    return (np.empty(size, dtype=np.int64), np.empty(size, dtype=np.int32),
            np.empty(size, dtype=np.int32), np.empty(size, dtype=np.int32),
            np.empty(size, dtype=np.int32))


@njit
def _rules(size):
    return (np.empty(size, dtype=np.int32), np.empty(size, dtype=np.int32),
            np.empty(size, dtype=np.int32), np.empty(size, dtype=np.int32))


@njit
def compress_all(codes, sigma, cutoff, u, capacity, check, info):
    """Whole compression in one call, keeping every rule in memory.

    Meant for inputs small enough that the rules never need spilling.
    ``info`` receives [fills, truncated fills, evictions].
    Returns ``(left, right, freq, fill, final text, st, steps)``.
    """
    T = build_text(codes)
    n = codes.shape[0]
    tp = np.empty(n + n // 64 + 1024, dtype=np.int32)
    st = np.zeros(C_LEN, dtype=np.int64)
    st[C_NEXT] = sigma
    st[C_CUTOFF] = cutoff
    st[C_CHECK] = check
    rcap = n // 2 + 1
    R = _rules(rcap)
    steps = np.zeros(3, dtype=np.int64)

    cnt_f = np.empty(sigma * sigma, dtype=np.int32)
    cnt_pos = np.empty(sigma * sigma, dtype=np.int32)
    hf = count_pairs(T, sigma, cutoff, cnt_f, cnt_pos)
    if hf > 0:
        keys = np.empty(hf, dtype=np.int64)
        fl = np.empty((2, hf), dtype=np.int32)
        hf_list(T, sigma, cnt_f, cnt_pos, keys, fl[0], fl[1])
        H = (np.zeros(u * u, dtype=np.int32), np.zeros(u * u, dtype=np.int32), np.zeros(u * u, dtype=np.int32))
        load_hf(T, tp, st, H, u, sigma, keys, fl[0], fl[1], hf)
        CT = (DENSE, u, np.zeros(1, dtype=np.int64), np.zeros(u * u, dtype=np.int32),
              np.full(u * u, -1, dtype=np.int32))
        run_queue(T, tp, st, HF, H, u, new_lf_state(1, 2), CT, _scratch(u + 1), _newpairs(u + 2), R, steps)

    H1 = (np.zeros(1, dtype=np.int32), np.zeros(1, dtype=np.int32), np.zeros(1, dtype=np.int32))
    hist = np.zeros(cutoff + 1, dtype=np.int32)
    stack = np.empty(STACK, dtype=np.int64)
    RS = radix_scratch()
    while True:
        hist[:] = 0
        m, top = refill_scan(T, tp, hist, st[C_NEXT], RS, stack)
        if top < 2:
            break
        info[0] += 1
        st[C_FILL] = info[0]
        size = cluster_slots(top)
        CT = (HASHED, 0, np.full(size, -1, dtype=np.int64), np.zeros(size, dtype=np.int32),
              np.full(size, -1, dtype=np.int32))
        thr, limit = threshold(hist, top, capacity // 2)
        if thr == top and hist[top] > limit:
            info[1] += 1
        Q = new_lf_state(capacity, top)
        refill_load(T, tp, st, Q, m, thr, limit)
        run_queue(T, tp, st, LF, H1, 1, Q, CT, _scratch(top + 1), _newpairs(top + 2), R, steps)
        info[2] += Q[10][ST_EVICTIONS]
    k = st[C_NRULES]
    return R[0][:k].copy(), R[1][:k].copy(), R[2][:k].copy(), R[3][:k].copy(), extract(T), st, steps
