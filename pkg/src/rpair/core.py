"""Re-Pair compression driver.

The high-frequency phase handles pairs occurring at least ``ceil(n^(2/3))``
times with a dense table; the low-frequency phase then repeatedly reloads
a bounded queue from a full scan of the text (a "fill") and extracts from
it until nothing at or above the fill's floor frequency remains.

Rules are produced in chunks and spilled to a temporary file, so the
working set during compression is the text, the position arena and the
queue structures.
"""
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K
from ._jit import leaf
from .cluster import HASHED
from .errors import ContractError
from .lfqueue import ST_EVICTIONS, lf_fresh_bytes, lf_state_in, new_lf_state, pow2_at_least
from .memory import MemoryAccountant, budget_bytes, cutoff_for, universe_for
from .sort import STACK
from .text import as_codes, build_text, extract

SIGMA = 256
RULE_CHUNK = 1 << 12
MIN_CAPACITY = 1024
DEFAULT_EPSILON = 0.25
SMALL_N = 1 << 16


@leaf
def undefined_rule(left, right, sigma):
    """First rule using a symbol not yet defined at that point, or -1."""
    for i in range(left.shape[0]):
        a = left[i]
        b = right[i]
        if a < 0 or b < 0 or a >= sigma + i or b >= sigma + i:
            return i
    return -1


@dataclass
class Grammar:
    """Rules ``sigma + i -> (left[i], right[i])`` in creation order."""

    sigma: int
    left: np.ndarray
    right: np.ndarray
    freq: np.ndarray
    fill: np.ndarray = None

    def __len__(self):
        return len(self.left)

    @property
    def d(self):
        return len(self.left)

    @property
    def rules(self):
        return list(zip(self.left.tolist(), self.right.tolist()))

    @property
    def distinct_freqs(self):
        return len(set(self.freq.tolist()))

    def expand(self, text):
        from .archive import expand
        return expand(self, text)

    def check(self):
        if len(self.left) and undefined_rule(self.left, self.right, self.sigma) >= 0:
            raise ContractError("rule refers to an undefined symbol")

    def trace_lines(self):
        for i, (f, a, b) in enumerate(zip(self.freq.tolist(), self.left.tolist(), self.right.tolist())):
            yield f"{f}\t{a}\t{b}\t{self.sigma + i}"


@dataclass
class CompressionStats:
    n: int
    sigma: int
    d: int
    t: int
    M: int
    encoded_grammar_bits: int = 0
    encoded_text_bits: int = 0
    lower_bound_bits: float = 0.0
    rate: float = 0.0
    hf_pairs: int = 0
    fills: int = 0
    truncated_fills: int = 0
    evictions: int = 0
    compactions: int = 0
    syncs: int = 0
    hf_max_calls: int = 0
    violations: int = 0
    peak_bytes: int = 0
    budget_bytes: int = 0
    lf_capacity: list = field(default_factory=list)
    cluster_steps: list = field(default_factory=list)

    def as_dict(self):
        return dict(self.__dict__)


@dataclass
class CompressionResult:
    grammar: Grammar
    final_text: np.ndarray
    stats: CompressionStats
    memory: MemoryAccountant

    def __iter__(self):
        return iter((self.grammar, self.final_text, self.stats))


class _RuleSpill:
    """Append-only store of (left, right, freq, fill) rows on disk."""

    def __init__(self):
        self.fh = tempfile.TemporaryFile()
        self.count = 0

    def write(self, R, k):
        if k:
            rows = np.stack([r[:k] for r in R], axis=1).astype(np.int64)
            self.fh.write(rows.tobytes())
            self.count += k

    def load(self, sigma):
        self.fh.seek(0)
        rows = np.frombuffer(self.fh.read(), dtype=np.int64).reshape(-1, 4)
        self.fh.close()
        return Grammar(sigma, rows[:, 0].copy(), rows[:, 1].copy(), rows[:, 2].copy(), rows[:, 3].copy())


def _seg(size):
    return K._scratch(size)


def _drain(T, tp, st, mode, H, u, Q, CT, SEG, NEWP, R, steps, spill):
    while True:
        res = K.run_queue(T, tp, st, mode, H, u, Q, CT, SEG, NEWP, R, steps)
        spill.write(R, int(st[K.C_NRULES]))
        st[K.C_NRULES] = 0
        if res == K.DONE:
            return


def _lf_capacity(avail_bytes, max_freq, spare_words=0, wanted=None):
    """Largest power-of-two queue capacity whose fresh arrays fit ``avail_bytes``.

    ``spare_words`` int32 words of idle arena can hold the large arrays
    instead; ``wanted`` stops the growth once that many pairs fit.
    """
    cap = MIN_CAPACITY
    while wanted is None or cap < wanted:
        nxt = cap * 2
        if lf_fresh_bytes(nxt, max_freq, spare_words) > avail_bytes:
            break
        cap = nxt
    return cap


def _hf_phase(T, tp, st, R, n, u, spill, acct, steps, stats):
    cnt_f, cnt_pos = acct.track("pair_counts", np.empty(SIGMA * SIGMA, dtype=np.int32),
                                np.empty(SIGMA * SIGMA, dtype=np.int32))
    hf = K.count_pairs(T, SIGMA, st[K.C_CUTOFF], cnt_f, cnt_pos)
    keys, freqs, lens = acct.track("hf_list", np.empty(hf, dtype=np.int64),
                                   np.empty(hf, dtype=np.int32), np.empty(hf, dtype=np.int32))
    K.hf_list(T, SIGMA, cnt_f, cnt_pos, keys, freqs, lens)
    del cnt_f, cnt_pos
    acct.free("pair_counts")
    if hf:
        H = acct.track("hf_queue", *(np.zeros(u * u, dtype=np.int32) for _ in range(3)))
        K.load_hf(T, tp, st, H, u, SIGMA, keys, freqs, lens, hf)
    del keys, freqs, lens
    acct.free("hf_list")
    if hf:
        # one clustering sees at most u distinct pairs, so a hashed table
        # of that size replaces a dense u*u one
        size = K.cluster_slots(u + 1)
        ckeys = np.full(size, -1, dtype=np.int64)
        C1 = np.zeros(size, dtype=np.int32)
        C2 = np.full(size, -1, dtype=np.int32)
        acct.track("hf_cluster", ckeys, C1, C2)
        CT = (HASHED, 0, ckeys, C1, C2)
        SEG = acct.track("hf_segments", *_seg(u + 1))
        NEWP = acct.track("hf_new", *K._newpairs(u + 2))
        Q = new_lf_state(1, 2)
        st[K.C_FILL] = 0
        _drain(T, tp, st, K.HF, H, u, Q, CT, SEG, NEWP, R, steps, spill)
        for name in ("hf_cluster", "hf_segments", "hf_new"):
            acct.free(name)
    acct.free("hf_queue")
    stats.hf_pairs = spill.count


def _lf_phase(T, tp, st, R, n, cutoff, epsilon, spill, acct, steps, stats, capacity=None):
    H = tuple(np.zeros(1, dtype=np.int32) for _ in range(3))
    hist = acct.track("lf_hist", np.zeros(cutoff + 1, dtype=np.int32))
    stack = np.empty(STACK, dtype=np.int64)
    budget = budget_bytes(n, epsilon)
    slack = tp.shape[0] - n
    while True:
        hist[:] = 0
        RS = acct.track("lf_radix", *K.radix_scratch())
        m, top = K.refill_scan(T, tp, hist, st[K.C_NEXT], RS, stack)
        del RS
        acct.free("lf_radix")
        if top < 2:
            break
        stats.fills += 1
        st[K.C_FILL] = stats.fills
        size = K.cluster_slots(top)
        ckeys = np.full(size, -1, dtype=np.int64)
        C1 = np.zeros(size, dtype=np.int32)
        C2 = np.full(size, -1, dtype=np.int32)
        acct.track("lf_cluster", ckeys, C1, C2)
        CT = (HASHED, 0, ckeys, C1, C2)
        SEG = acct.track("lf_segments", *_seg(top + 1))
        NEWP = acct.track("lf_new", *K._newpairs(top + 2))
        # the arena past m live positions and the usual slack sits idle
        # for the whole fill, so the queue borrows it
        arena = min(m + slack + (m + slack) % 2, tp.shape[0])
        spare = tp[arena:]
        # twice the loaded pairs leaves room for the ones a fill creates; a
        # larger queue only costs cache misses
        pairs = int(hist[2:].sum())
        cap = capacity or _lf_capacity(budget - acct.current, top, spare.shape[0], 2 * pairs)
        stats.lf_capacity.append(cap)
        thr, limit = K.threshold(hist, top, cap // 2)
        if thr == top and hist[top] > limit:
            stats.truncated_fills += 1
        Q, fresh = lf_state_in(spare, cap, top)
        acct.track("lf_queue", *fresh)
        del fresh
        live = tp[:arena]
        K.refill_load(T, live, st, Q, m, thr, limit)
        _drain(T, live, st, K.LF, H, 1, Q, CT, SEG, NEWP, R, steps, spill)
        stats.evictions += int(Q[10][ST_EVICTIONS])
        del Q, live, spare
        for name in ("lf_queue", "lf_cluster", "lf_segments", "lf_new"):
            acct.free(name)
    acct.free("lf_hist")


def compress(data, epsilon=DEFAULT_EPSILON, check=False, accountant=None, engine="auto",
             lf_capacity=None):
    """Compress ``data`` (bytes) into a grammar and a final text.

    ``check`` turns on per-step invariant checks (slow); their violation
    count lands in ``stats.violations``. ``engine`` picks the in-memory
    driver (``"small"``), the spilling, memory-accounted one (``"stream"``)
    or, by default, the former for inputs up to ``SMALL_N`` symbols when no
    accountant is given. ``lf_capacity`` pins the low-frequency queue size
    instead of deriving it from the memory budget.
    """
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    codes = as_codes(data, SIGMA)
    n = codes.shape[0]
    if engine == "auto":
        engine = "small" if n <= SMALL_N and accountant is None else "stream"
    if engine == "small":
        return _compress_small(codes, check, lf_capacity)
    if engine != "stream":
        raise ValueError(f"unknown engine {engine!r}")
    return _compress_stream(codes, epsilon, check, accountant or MemoryAccountant(), lf_capacity)


def _finish(grammar, final, stats, st, steps):
    stats.d = grammar.d
    stats.t = len(final)
    stats.M = grammar.distinct_freqs
    stats.compactions = int(st[K.C_COMPACTIONS])
    stats.syncs = int(st[K.C_SYNCS])
    stats.hf_max_calls = int(st[K.C_HFMAX])
    stats.violations += int(st[K.C_VIOLATIONS]) + int(st[K.C_MISMATCH])
    stats.cluster_steps = steps.tolist()


def _compress_small(codes, check, capacity=None):
    n = codes.shape[0]
    cap = capacity or pow2_at_least(max(MIN_CAPACITY, n))
    info = np.zeros(3, dtype=np.int64)
    left, right, freq, fill, final, st, steps = K.compress_all(
        codes, SIGMA, cutoff_for(n), universe_for(n, SIGMA), cap, 1 if check else 0, info)
    grammar = Grammar(SIGMA, *(a.astype(np.int64) for a in (left, right, freq, fill)))
    stats = CompressionStats(n=n, sigma=SIGMA, d=0, t=0, M=0, fills=int(info[0]),
                             truncated_fills=int(info[1]), evictions=int(info[2]))
    stats.hf_pairs = int(np.count_nonzero(fill == 0))
    stats.lf_capacity = [cap] * stats.fills
    _finish(grammar, final, stats, st, steps)
    return CompressionResult(grammar, final, stats, None)


def _compress_stream(codes, epsilon, check, acct, capacity=None):
    T = acct.track("text", *build_text(codes))
    del codes
    n = T[0].shape[0]
    cutoff = cutoff_for(n)
    u = universe_for(n, SIGMA)
    slack = n // 64 + 1024
    tp = acct.track("positions", np.empty(n + slack, dtype=np.int32))
    st = np.zeros(K.C_LEN, dtype=np.int64)
    st[K.C_NEXT] = SIGMA
    st[K.C_CUTOFF] = cutoff
    st[K.C_CHECK] = 1 if check else 0
    R = acct.track("rule_chunk", *(np.empty(RULE_CHUNK, dtype=np.int32) for _ in range(4)))
    steps = np.zeros(3, dtype=np.int64)
    spill = _RuleSpill()
    stats = CompressionStats(n=n, sigma=SIGMA, d=0, t=0, M=0)
    try:
        _hf_phase(T, tp, st, R, n, u, spill, acct, steps, stats)
        _lf_phase(T, tp, st, R, n, cutoff, epsilon, spill, acct, steps, stats, capacity)
    finally:
        acct.free("rule_chunk")
    final = extract(T)
    grammar = spill.load(SIGMA)
    _finish(grammar, final, stats, st, steps)
    stats.peak_bytes = acct.peak
    stats.budget_bytes = budget_bytes(n, epsilon)
    return CompressionResult(grammar, final, stats, acct)


def initial_count_hf(text):
    """Count the byte pairs of a fresh ``SkippableText`` and build the high-frequency queue.

    Returns ``(HFQueue, positions)`` where ``positions`` is the filled prefix
    of the position arena.
    """
    from .hfqueue import HFQueue
    n = text.n
    cutoff = cutoff_for(n)
    q = HFQueue(universe_for(n, text.sigma))
    st = np.zeros(K.C_LEN, dtype=np.int64)
    tp = np.empty(n, dtype=np.int32)
    cnt_f = np.empty(text.sigma * text.sigma, dtype=np.int32)
    cnt_pos = np.empty(text.sigma * text.sigma, dtype=np.int32)
    hf = K.count_pairs(text.T, text.sigma, cutoff, cnt_f, cnt_pos)
    keys = np.empty(hf, dtype=np.int64)
    freqs, lens = np.empty((2, hf), dtype=np.int32)
    K.hf_list(text.T, text.sigma, cnt_f, cnt_pos, keys, freqs, lens)
    K.load_hf(text.T, tp, st, (q.P, q.L, q.F), q.u, text.sigma, keys, freqs, lens, hf)
    return q, tp[:st[K.C_TPEND]].copy()
