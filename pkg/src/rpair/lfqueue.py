"""Bounded queue for low-frequency pairs.

Records live in a linear-probing table (load factor at most 0.5) keyed by
pair key. Bucket ``f`` lists, in append order, a superset of the pairs
whose frequency is ``f``: decreasing a pair appends it to the next bucket
down and leaves a stale copy behind. A bucket is rebuilt once more than
half of it is stale. ``max`` walks the bucket of the current top frequency
with a cursor, sorting the bucket by pair key when it becomes current.
When the table is full, the least frequent half of the pairs is dropped.

Buckets are regions of one fixed pool, each preceded by a header word
holding its frequency. A bucket that outgrows its region moves to the end
of the pool and its old region is marked as a gap (negative header). When
the end is reached, live regions slide down over the gaps and lose their
stale entries. That leaves at most two words per queued pair in use, so a
pool of ``4 * capacity`` words never runs out.

Kernel state is a tuple ``Q = (keys, P, L, F, pool, bstart, bcap, bsize,
bdel, hist, st, stack)`` with scalar fields in ``st`` (see ``ST_*``).
None of the kernels allocate, which lets them run without reference
counting.
"""
import numpy as np

from ._jit import leaf, njit
from .errors import ContractError
from .pairs import khash, pkey, unkey
from .sort import STACK, sort_range

ST_MAXF = 0
ST_EXT = 1
ST_SIZE = 2
ST_CAP = 3
ST_SORTED = 4
ST_POOLTOP = 5
ST_COMPACTIONS = 6
ST_MAXEVICT = 7
ST_REBUILDS = 8
ST_WORK = 9
ST_EVICTIONS = 10
ST_OPS = 11
ST_OVERFLOW = 12
ST_LEN = 16


@leaf
def lf_find(keys, k):
    mask = keys.shape[0] - 1
    s = khash(k) & mask
    while True:
        cur = keys[s]
        if cur == k:
            return s
        if cur == -1:
            return -1
        s = (s + 1) & mask


@leaf
def _delete_slot(keys, P, L, F, s):
    # backward-shift deletion keeps probe chains intact without tombstones
    mask = keys.shape[0] - 1
    i = s
    j = s
    while True:
        j = (j + 1) & mask
        if keys[j] == -1:
            break
        home = khash(keys[j]) & mask
        # move j into hole i unless its home lies cyclically in (i, j]
        if i <= j:
            stay = i < home <= j
        else:
            stay = home > i or home <= j
        if not stay:
            keys[i] = keys[j]
            P[i] = P[j]
            L[i] = L[j]
            F[i] = F[j]
            i = j
    keys[i] = -1
    P[i] = 0
    L[i] = 0
    F[i] = 0


@leaf
def _compact_pool(Q):
    """Slide live regions down over gaps, dropping stale entries."""
    keys, F, pool, bstart, bcap, bsize, bdel, st = Q[0], Q[3], Q[4], Q[5], Q[6], Q[7], Q[8], Q[10]
    end = st[ST_POOLTOP]
    r = 0
    w = 0
    while r < end:
        h = pool[r]
        if h < 0:
            r -= h
            continue
        f = h
        s0 = r + 1
        sz = bsize[f]
        nxt = s0 + bcap[f]
        pool[w] = f
        k = w + 1
        for i in range(s0, s0 + sz):
            key = pool[i]
            s = lf_find(keys, key)
            if s >= 0 and F[s] == f:
                pool[k] = key
                k += 1
        st[ST_WORK] += sz
        live = k - w - 1
        bsize[f] = live
        bdel[f] = 0
        if live == 0:
            bcap[f] = 0
        else:
            bstart[f] = w + 1
            bcap[f] = live
            w = k
        if f == st[ST_MAXF]:
            st[ST_EXT] = 0
        r = nxt
    st[ST_POOLTOP] = w
    st[ST_COMPACTIONS] += 1


@leaf
def _push(Q, f, k):
    pool, bstart, bcap, bsize, st = Q[4], Q[5], Q[6], Q[7], Q[10]
    sz = bsize[f]
    if sz == bcap[f]:
        if sz > 0 and bstart[f] + sz == st[ST_POOLTOP] and st[ST_POOLTOP] < pool.shape[0]:
            # last region: grow in place
            bcap[f] = sz + 1
            st[ST_POOLTOP] += 1
        else:
            cap = 4 if sz < 4 else 2 * sz
            if st[ST_POOLTOP] + cap + 1 > pool.shape[0]:
                _compact_pool(Q)
                sz = bsize[f]
                if st[ST_POOLTOP] + cap + 1 > pool.shape[0]:
                    cap = sz + 1
                    if st[ST_POOLTOP] + cap + 1 > pool.shape[0]:
                        st[ST_OVERFLOW] += 1
                        return
            if bcap[f] > 0:
                pool[bstart[f] - 1] = -(bcap[f] + 1)
            top = st[ST_POOLTOP]
            pool[top] = f
            s0 = bstart[f]
            for i in range(sz):
                pool[top + 1 + i] = pool[s0 + i]
            bstart[f] = top + 1
            bcap[f] = cap
            st[ST_POOLTOP] = top + 1 + cap
    pool[bstart[f] + sz] = k
    bsize[f] = sz + 1
    st[ST_WORK] += 1


@leaf
def _rebuild(Q, f):
    keys, F, pool, bstart, bsize, bdel, st = Q[0], Q[3], Q[4], Q[5], Q[7], Q[8], Q[10]
    s0 = bstart[f]
    sz = bsize[f]
    w = s0
    for i in range(s0, s0 + sz):
        k = pool[i]
        s = lf_find(keys, k)
        if s >= 0 and F[s] == f:
            pool[w] = k
            w += 1
    st[ST_WORK] += sz
    st[ST_REBUILDS] += 1
    bsize[f] = w - s0
    bdel[f] = 0
    if f == st[ST_MAXF]:
        st[ST_EXT] = 0


@leaf
def _mark_stale(Q, f):
    bsize, bdel = Q[7], Q[8]
    bdel[f] += 1
    if 2 * bdel[f] > bsize[f]:
        _rebuild(Q, f)


@leaf
def lf_remove(Q, s):
    f = Q[3][s]
    _delete_slot(Q[0], Q[1], Q[2], Q[3], s)
    Q[10][ST_SIZE] -= 1
    _mark_stale(Q, f)


@leaf
def lf_decrease(Q, s):
    """Decrement the pair in slot ``s``; returns False if it dropped out."""
    keys, F, st = Q[0], Q[3], Q[10]
    f = F[s]
    st[ST_OPS] += 1
    if f <= 2:
        lf_remove(Q, s)
        return False
    F[s] = f - 1
    _push(Q, f - 1, keys[s])
    _mark_stale(Q, f)
    return True


@leaf
def lf_evict(Q):
    """Drop the ceil(size/2) least frequent pairs (largest keys first on ties)."""
    keys, F, pool, bstart, bsize, bdel, hist, st = Q[0], Q[3], Q[4], Q[5], Q[7], Q[8], Q[9], Q[10]
    size = st[ST_SIZE]
    if size == 0:
        return 0
    target = (size + 1) // 2
    for s in range(keys.shape[0]):
        if keys[s] != -1:
            hist[F[s]] += 1
    cum = 0
    tau = 0
    for f in range(hist.shape[0]):
        if cum + hist[f] >= target:
            tau = f
            break
        cum += hist[f]
    top = -1
    for f in range(tau):
        if hist[f] == 0:
            continue
        top = f
        s0 = bstart[f]
        for i in range(s0, s0 + bsize[f]):
            s = lf_find(keys, pool[i])
            if s >= 0 and F[s] == f:
                _delete_slot(keys, Q[1], Q[2], F, s)
        st[ST_WORK] += bsize[f]
        bsize[f] = 0
        bdel[f] = 0
    need = target - cum
    if need > 0:
        top = tau
        _rebuild(Q, tau)
        s0 = bstart[tau]
        sz = bsize[tau]
        sort_range(pool, s0, s0 + sz, Q[11])
        for i in range(s0 + sz - need, s0 + sz):
            _delete_slot(keys, Q[1], Q[2], F, lf_find(keys, pool[i]))
        bsize[tau] = sz - need
        if tau == st[ST_MAXF]:
            st[ST_EXT] = 0
            st[ST_SORTED] = 1
    for f in range(hist.shape[0]):
        hist[f] = 0
    st[ST_SIZE] = size - target
    st[ST_EVICTIONS] += 1
    if top > st[ST_MAXEVICT]:
        st[ST_MAXEVICT] = top
    return target


@leaf
def lf_insert(Q, k, p, length, f):
    keys, P, L, F, st = Q[0], Q[1], Q[2], Q[3], Q[10]
    if st[ST_SIZE] >= st[ST_CAP]:
        lf_evict(Q)
    mask = keys.shape[0] - 1
    s = khash(k) & mask
    while keys[s] != -1:
        s = (s + 1) & mask
    keys[s] = k
    P[s] = p
    L[s] = length
    F[s] = f
    _push(Q, f, k)
    st[ST_SIZE] += 1
    st[ST_OPS] += 1
    if f > st[ST_MAXF]:
        st[ST_MAXF] = f
        st[ST_SORTED] = 0
        st[ST_EXT] = 0


@leaf
def lf_max(Q, floor):
    """Slot of the next pair to extract, or -1 once nothing reaches ``floor``."""
    keys, F, pool, bstart, bsize, st = Q[0], Q[3], Q[4], Q[5], Q[7], Q[10]
    lowest = floor if floor > 2 else 2
    while st[ST_MAXF] >= lowest:
        f = st[ST_MAXF]
        s0 = bstart[f]
        if st[ST_SORTED] == 0:
            sort_range(pool, s0, s0 + bsize[f], Q[11])
            st[ST_SORTED] = 1
            st[ST_EXT] = 0
        while st[ST_EXT] < bsize[f]:
            k = pool[s0 + st[ST_EXT]]
            st[ST_EXT] += 1
            st[ST_WORK] += 1
            s = lf_find(keys, k)
            if s >= 0 and F[s] == f:
                return s
        st[ST_MAXF] = f - 1
        st[ST_SORTED] = 0
        st[ST_EXT] = 0
    return -1


@leaf
def lf_check(Q):
    """Count violations of the bucket and rebuild invariants."""
    keys, F, pool, bstart, bsize, bdel, st = Q[0], Q[3], Q[4], Q[5], Q[7], Q[8], Q[10]
    bad = st[ST_OVERFLOW]
    live = 0
    for s in range(keys.shape[0]):
        if keys[s] == -1:
            continue
        live += 1
        f = F[s]
        if f > st[ST_MAXF]:
            bad += 1
        found = False
        for i in range(bstart[f], bstart[f] + bsize[f]):
            if pool[i] == keys[s]:
                found = True
                break
        if not found:
            bad += 1
    for f in range(bsize.shape[0]):
        if 2 * bdel[f] > bsize[f]:
            bad += 1
    if live != st[ST_SIZE] or live > st[ST_CAP]:
        bad += 1
    return bad


@njit
def pow2_at_least(x):
    p = 1
    while p < x:
        p <<= 1
    return p


@njit
def pool_words(capacity):
    return 4 * capacity + 64


@njit
def new_lf_state(capacity, max_freq):
    slots = pow2_at_least(max(4, 2 * capacity))
    keys = np.full(slots, -1, dtype=np.int64)
    P = np.zeros(slots, dtype=np.int32)
    L = np.zeros(slots, dtype=np.int32)
    F = np.zeros(slots, dtype=np.int32)
    nb = max_freq + 1
    pool = np.empty(pool_words(capacity), dtype=np.int64)
    bstart = np.zeros(nb, dtype=np.int32)
    bcap = np.zeros(nb, dtype=np.int32)
    bsize = np.zeros(nb, dtype=np.int32)
    bdel = np.zeros(nb, dtype=np.int32)
    hist = np.zeros(nb, dtype=np.int32)
    st = np.zeros(ST_LEN, dtype=np.int64)
    st[ST_CAP] = capacity
    st[ST_MAXEVICT] = -1
    stack = np.empty(STACK, dtype=np.int64)
    return (keys, P, L, F, pool, bstart, bcap, bsize, bdel, hist, st, stack)


def lf_bytes(capacity, max_freq):
    """Bytes held by an LF queue of the given shape."""
    slots = int(pow2_at_least(max(4, 2 * capacity)))
    return slots * (8 + 4 + 4 + 4) + (max_freq + 1) * 4 * 5 + 8 * int(pool_words(capacity)) + 8 * STACK


def _large_parts(capacity):
    # (int32 words, dtype, fill) of keys, P, L, F and the pool, the arrays that grow with capacity
    slots = int(pow2_at_least(max(4, 2 * capacity)))
    return [(2 * slots, np.int64, -1), (slots, np.int32, 0), (slots, np.int32, 0),
            (slots, np.int32, 0), (2 * int(pool_words(capacity)), np.int64, None)]


def lf_fresh_bytes(capacity, max_freq, spare_words):
    """Bytes ``lf_state_in`` must allocate when ``spare_words`` int32 words can be borrowed."""
    fresh = (max_freq + 1) * 4 * 5 + 8 * STACK + 8 * ST_LEN
    left = spare_words
    for words, _, _ in _large_parts(capacity):
        if words <= left:
            left -= words
        else:
            fresh += 4 * words
    return fresh


def lf_state_in(spare, capacity, max_freq):
    """Like ``new_lf_state``, but the large arrays are views into ``spare`` where they fit.

    ``spare`` is an idle int32 region (the unused tail of the position arena)
    that must outlive the queue. Returns ``(Q, allocated arrays)``.
    """
    q = list(new_lf_state(1, max_freq))
    fresh = [a for a in q[5:] if isinstance(a, np.ndarray)]
    at = 0
    for i, (words, dtype, fill) in enumerate(_large_parts(capacity)):
        if at + words <= spare.shape[0]:
            a = spare[at:at + words].view(dtype)
            at += words
        else:
            a = np.empty(words * 4 // np.dtype(dtype).itemsize, dtype=dtype)
            fresh.append(a)
        if fill is not None:
            a[:] = fill
        q[i] = a
    q[10][ST_CAP] = capacity
    return tuple(q), fresh


class LFQueue:
    """Python face of the low-frequency queue, used for testing and inspection."""

    def __init__(self, capacity, max_freq):
        if capacity < 1:
            raise ContractError("capacity must be positive")
        self.capacity = int(capacity)
        self.max_freq = int(max_freq)
        self.Q = new_lf_state(self.capacity, self.max_freq)

    @property
    def st(self):
        return self.Q[10]

    def __len__(self):
        return int(self.st[ST_SIZE])

    @property
    def max_f(self):
        return int(self.st[ST_MAXF])

    @property
    def ext(self):
        return int(self.st[ST_EXT])

    @property
    def max_evicted(self):
        return int(self.st[ST_MAXEVICT])

    def bucket(self, f):
        s0 = int(self.Q[5][f])
        return [_pair(k) for k in self.Q[4][s0:s0 + int(self.Q[7][f])]]

    def deleted(self, f):
        return int(self.Q[8][f])

    def _slot(self, ab):
        return int(lf_find(self.Q[0], pkey(ab[0], ab[1])))

    def __contains__(self, ab):
        return self._slot(ab) >= 0

    contains = __contains__

    def get(self, ab):
        s = self._slot(ab)
        if s < 0:
            return None
        return int(self.Q[1][s]), int(self.Q[2][s]), int(self.Q[3][s])

    def insert(self, ab, P, L, F):
        if not 2 <= F <= self.max_freq:
            raise ContractError(f"frequency {F} outside [2, {self.max_freq}]")
        if ab in self:
            raise ContractError(f"pair {ab} already queued")
        lf_insert(self.Q, pkey(ab[0], ab[1]), P, L, F)

    def decrease(self, ab):
        s = self._slot(ab)
        if s < 0:
            raise ContractError(f"pair {ab} not queued")
        lf_decrease(self.Q, s)

    def remove(self, ab):
        s = self._slot(ab)
        if s < 0:
            raise ContractError(f"pair {ab} not queued")
        lf_remove(self.Q, s)

    def max(self, floor=2):
        """Next pair to extract; the caller is expected to ``remove`` it."""
        s = int(lf_max(self.Q, floor))
        if s < 0:
            return None
        return _pair(self.Q[0][s])

    def pop(self):
        ab = self.max()
        if ab is not None:
            rec = self.get(ab)
            self.remove(ab)
            return ab, rec
        return None

    def evict_low_half(self):
        return int(lf_evict(self.Q))

    def violations(self):
        return int(lf_check(self.Q))

    def nbytes(self):
        return lf_bytes(self.capacity, self.max_freq)


def _pair(k):
    a, b = unkey(np.int64(k))
    return int(a), int(b)
