"""In-place clustering of text positions by the pair starting at each one.

Counting-based and linear in the number of positions: one pass counts the
pairs, one pass assigns each pair the offset of its cluster in first-appearance
order, and a swap loop moves every position into its cluster. Two tables
``C1`` (cluster start, 0 when idle) and ``C2`` (fill pointer, -1 when idle)
are shared across calls and restored before returning.

Tables are either dense (indexed by ``a * u + b`` over a universe of ``u``
symbols) or a linear-probing map from pair keys to slots; the map is
cleared through the list of slots touched by the call.
"""
from dataclasses import dataclass

import numpy as np

from ._jit import leaf, njit
from .pairs import khash, pkey, unkey
from .text import pair_at

DENSE = 0
HASHED = 1


@leaf
def _slot(mode, u, ckeys, a, b, insert):
    if mode == DENSE:
        return a * u + b
    k = pkey(a, b)
    mask = ckeys.shape[0] - 1
    s = khash(k) & mask
    while True:
        cur = ckeys[s]
        if cur == k:
            return s
        if cur == -1:
            if insert:
                ckeys[s] = k
                return s
            return -1
        s = (s + 1) & mask


@leaf
def cluster_kernel(A, lo, hi, T, mode, u, ckeys, C1, C2, seg_key, seg_start, seg_len, seg_slot, steps):
    """Cluster ``A[lo:hi]`` in place.

    Positions that are blank or hold the last symbol are dropped; the
    ``m`` survivors are packed into ``A[lo:lo+m]`` before clustering.
    Segment ``s`` covers ``A[lo+seg_start[s] : lo+seg_start[s]+seg_len[s]]``
    and holds pair key ``seg_key[s]``. Returns ``(m, number of segments)``.
    ``steps`` accumulates [positions seen, j increments, swaps].
    """
    m = 0
    for i in range(lo, hi):
        p = A[i]
        if p < 0 or p >= T[0].shape[0] or ((np.int64(T[1][p >> 5]) >> (p & 31)) & 1) == 0:
            continue
        a, b, _ = pair_at(T, p)
        if b < 0:
            continue
        A[lo + m] = p
        m += 1
    steps[0] += m
    for i in range(lo, lo + m):
        a, b, _ = pair_at(T, A[i])
        s = _slot(mode, u, ckeys, a, b, True)
        C1[s] += 1
    nseg = 0
    j = 0
    for i in range(lo, lo + m):
        a, b, _ = pair_at(T, A[i])
        s = _slot(mode, u, ckeys, a, b, False)
        if C2[s] == -1:
            j += C1[s]
            seg_len[nseg] = C1[s]
            C1[s] = j - C1[s]
            C2[s] = C1[s]
            seg_key[nseg] = pkey(a, b)
            seg_start[nseg] = C1[s]
            seg_slot[nseg] = s
            nseg += 1
    j = 0
    while j < m:
        a, b, _ = pair_at(T, A[lo + j])
        s = _slot(mode, u, ckeys, a, b, False)
        if C1[s] <= j and j < C2[s]:
            j += 1
            steps[1] += 1
        else:
            t = C2[s]
            tmp = A[lo + j]
            A[lo + j] = A[lo + t]
            A[lo + t] = tmp
            C2[s] = t + 1
            steps[2] += 1
    for g in range(nseg):
        s = seg_slot[g]
        C1[s] = 0
        C2[s] = -1
        if mode == HASHED:
            ckeys[s] = -1
    return m, nseg


def _pow2_at_least(x):
    p = 1
    while p < x:
        p <<= 1
    return p


class ClusterTables:
    """Reusable C1/C2 tables over a symbol universe of size ``universe``.

    Dense when ``universe**2 <= dense_limit``, otherwise hashed with capacity
    at least twice the number of positions ever clustered in one call.
    """

    def __init__(self, universe, dense_limit=1 << 22, capacity=1024):
        self.universe = int(universe)
        if self.universe * self.universe <= dense_limit:
            self.mode = DENSE
            size = self.universe * self.universe
            self.ckeys = np.zeros(1, dtype=np.int64)
        else:
            self.mode = HASHED
            size = _pow2_at_least(2 * capacity)
            self.ckeys = np.full(size, -1, dtype=np.int64)
        self.C1 = np.zeros(size, dtype=np.int32)
        self.C2 = np.full(size, -1, dtype=np.int32)

    def reserve(self, count):
        if self.mode == HASHED and self.ckeys.shape[0] < 2 * count:
            size = _pow2_at_least(2 * count)
            self.ckeys = np.full(size, -1, dtype=np.int64)
            self.C1 = np.zeros(size, dtype=np.int32)
            self.C2 = np.full(size, -1, dtype=np.int32)

    def is_clean(self):
        return bool((self.C1 == 0).all() and (self.C2 == -1).all()
                    and (self.mode == DENSE or (self.ckeys == -1).all()))

    def nbytes(self):
        return self.C1.nbytes + self.C2.nbytes + self.ckeys.nbytes


@dataclass
class ClusterSegments:
    count: int
    segments: list  # (pair, start, length)
    steps: np.ndarray

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)


def cluster(A, text, tables):
    """Cluster the position array ``A`` by current pair, in place.

    Valid positions end up in ``A[:result.count]``; the rest of ``A`` is
    left unspecified.
    """
    k = len(A)
    tables.reserve(k)
    if tables.mode == DENSE:
        limit = tables.universe
        for p in A:
            if 0 <= p < text.n and not text.is_blank(int(p)):
                pr = text.pair_starting_at(int(p))
                if pr is not None and max(pr) >= limit:
                    raise ValueError(f"pair {pr} outside dense universe {limit}")
    seg_key = np.empty(k, dtype=np.int64)
    seg_start = np.empty(k, dtype=np.int64)
    seg_len = np.empty(k, dtype=np.int64)
    seg_slot = np.empty(k, dtype=np.int64)
    steps = np.zeros(3, dtype=np.int64)
    m, nseg = cluster_kernel(A, 0, k, text.T, tables.mode, tables.universe, tables.ckeys,
                             tables.C1, tables.C2, seg_key, seg_start, seg_len, seg_slot, steps)
    segs = []
    for g in range(nseg):
        a, b = unkey(seg_key[g])
        segs.append(((int(a), int(b)), int(seg_start[g]), int(seg_len[g])))
    return ClusterSegments(int(m), segs, steps)
