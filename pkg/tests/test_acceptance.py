"""End-to-end acceptance checks; each prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
are produced; they are repeated in the terminal summary either way.
"""
import itertools
import math
import os
import random
import statistics
import time
from pathlib import Path

import numpy as np
import pytest

from rpair import archive_stats, build_archive, compress, decompress, naive_compress
from rpair.cluster import ClusterTables, cluster
from rpair.codec import (decode_grammar, elias_delta_decode, elias_delta_encode, encode_grammar,
                         encoded_size, monotone_runs)
from rpair.core import Grammar
from rpair.corpora import duplicated_documents, english_like, fibonacci_word, thue_morse
from rpair.memory import MemoryAccountant
from rpair.oracle import pair_counts
from rpair.text import SkippableText
from test_cluster import check_clustered

pytestmark = pytest.mark.slow

MB = 1 << 20
ROUNDTRIP_SECONDS = 300
SCALING_RATIO = 2.6
CERE_D, CERE_M, CERE_RATE, CERE_RATE_TOL = 1712283, 1441, 91.69, 0.5


def _repeats(final):
    counts = pair_counts(np.asarray(final).tolist())
    return max(counts.values(), default=0) >= 2


class Tally:
    def __init__(self):
        self.cases = 0
        self.roundtrip_bad = 0
        self.repeat_bad = 0
        self.oracle_bad = 0
        self.oracle_cases = 0
        self.multi_fill = 0
        self.runs_over_m = 0
        self.roundtrip_secs = 0.0

    def run(self, data, oracle=False):
        self.cases += 1
        t0 = time.perf_counter()
        res = compress(data)
        blob, hdr, _ = build_archive(res.grammar, res.final_text, len(data))
        self.roundtrip_bad += decompress(blob) != data
        self.roundtrip_secs += time.perf_counter() - t0
        self.repeat_bad += _repeats(res.final_text)
        single = res.stats.fills <= 1
        self.multi_fill += not single
        if single and hdr.R > res.stats.M:
            self.runs_over_m += 1
        if oracle:
            self.oracle_cases += 1
            g, final = naive_compress(data)
            same = (np.array_equal(g.left, res.grammar.left)
                    and np.array_equal(g.right, res.grammar.right)
                    and np.array_equal(g.freq, res.grammar.freq)
                    and np.array_equal(final, res.final_text)
                    and build_archive(g, final, len(data))[0] == blob)
            self.oracle_bad += not same
        return res


def _random_string(rng, max_len):
    k = rng.choice([2, 3, 4, 16, 256])
    return bytes(rng.randrange(k) for _ in range(rng.randrange(1, max_len + 1)))


@pytest.fixture(scope="module")
def ternary():
    tally = Tally()
    for length in range(1, 13):
        for tup in itertools.product(b"abc", repeat=length):
            tally.run(bytes(tup), oracle=True)
    return tally


@pytest.fixture(scope="module")
def random_small():
    rng = random.Random(2024)
    tally = Tally()
    for _ in range(1000):
        tally.run(_random_string(rng, 4096))
    for _ in range(500):
        tally.run(_random_string(rng, 2048), oracle=True)
    return tally


@pytest.fixture(scope="module")
def generated():
    """Repetitive corpora up to 10 MB: roundtrip tally plus archive stats per corpus."""
    tally = Tally()
    rows = []
    gens = {"fibonacci": fibonacci_word, "thue-morse": thue_morse, "duplicated": duplicated_documents}
    for name, gen in gens.items():
        for n in (1000, 100_000, MB, 10_000_000):
            data = gen(n)
            res = tally.run(data)
            blob = build_archive(res.grammar, res.final_text, len(data))[0]
            rows.append((name, n, archive_stats(blob)))
    return tally, rows


def test_roundtrip(ternary, random_small, generated, verdict):
    tally, _ = generated
    parts = [ternary, random_small, tally]
    bad = sum(t.roundtrip_bad for t in parts)
    cases = sum(t.cases for t in parts)
    secs = sum(t.roundtrip_secs for t in parts)
    ok = verdict(1, bad == 0 and secs < ROUNDTRIP_SECONDS,
                 f"{cases} inputs, {bad} mismatches, {secs:.0f}s of roundtrip work "
                 f"(limit {ROUNDTRIP_SECONDS}s)")
    assert ok


def test_final_text_has_no_repeated_pair(ternary, random_small, generated, verdict):
    tally, _ = generated
    parts = [ternary, random_small, tally]
    bad = sum(t.repeat_bad for t in parts)
    cases = sum(t.cases for t in parts)
    assert verdict(2, bad == 0, f"{cases} final texts, {bad} with a repeated pair")


def test_matches_oracle(ternary, random_small, verdict):
    cases = ternary.oracle_cases + random_small.oracle_cases
    bad = ternary.oracle_bad + random_small.oracle_bad
    multi = ternary.multi_fill + random_small.multi_fill
    ok = verdict(3, bad == 0 and multi == 0,
                 f"{cases} inputs, {bad} differ from the oracle, {multi} needed more than one fill")
    assert ok


def _cluster_case(rng, tables):
    n = rng.randrange(2, 80)
    text = SkippableText.from_bytes(bytes(rng.randrange(1 + rng.randrange(5)) for _ in range(n)))
    for _ in range(rng.randrange(n // 2 + 1)):
        live = [i for i in range(n) if not text.is_blank(i)]
        if len(live) < 2:
            break
        text.replace_pair_at(rng.choice(live[:-1]), 256 + rng.randrange(40))
    before = list(dict.fromkeys(rng.randrange(n) for _ in range(rng.randrange(0, 2 * n))))
    A = np.array(before, dtype=np.int32)
    res = cluster(A, text, tables)
    try:
        check_clustered(text, before, A, res)
    except AssertionError:
        return False
    return tables.is_clean()


def test_clustering(verdict):
    rng = random.Random(404)
    dense = ClusterTables(300, capacity=16)
    hashed = ClusterTables(300, dense_limit=0, capacity=16)
    bad = 0
    for i in range(10_000):
        bad += not _cluster_case(rng, dense if i % 2 else hashed)
    assert verdict(4, bad == 0, f"10000 arrays (dense and hashed tables), {bad} failures")


def trace_violations(grammar):
    """Rules out of order inside a fill: frequency must not rise, ties by max(a, b) ascending."""
    big = np.maximum(grammar.left, grammar.right)
    bad = 0
    for i in range(1, grammar.d):
        if grammar.fill[i] != grammar.fill[i - 1]:
            continue
        f0, f1 = grammar.freq[i - 1], grammar.freq[i]
        if f1 > f0 or (f1 == f0 and big[i] < big[i - 1]):
            bad += 1
    return bad


def test_queue_invariants(verdict):
    rng = random.Random(55)
    runs = []
    for _ in range(200):
        data = _random_string(rng, 4096)
        runs += [(data, "small", None), (data, "stream", None), (data, "stream", 8)]
    runs += [(english_like(200_000, seed=3), "stream", None),
             (duplicated_documents(200_000, seed=3), "stream", 64)]
    violations = order_bad = 0
    for data, engine, cap in runs:
        res = compress(data, check=True, engine=engine, lf_capacity=cap)
        violations += res.stats.violations
        order_bad += trace_violations(res.grammar)
    ok = verdict(5, violations == 0 and order_bad == 0,
                 f"{len(runs)} instrumented runs, {violations} record or rebuild violations, "
                 f"{order_bad} out-of-order extractions")
    assert ok


def _random_grammar(rng, d, sigma=256):
    left = np.array([rng.randrange(sigma + i) for i in range(d)], dtype=np.int64)
    right = np.array([rng.randrange(sigma + i) for i in range(d)], dtype=np.int64)
    return Grammar(sigma, left, right, np.zeros(d, dtype=np.int64))


def _analytic_bits(g):
    big = np.maximum(g.left, g.right).tolist()
    small = np.minimum(g.left, g.right).tolist()
    runs = monotone_runs(big)
    heads, gaps, i = [], [], 0
    for r in runs:
        heads.append(big[i])
        gaps.extend(big[j] - big[j - 1] for j in range(i + 1, i + r))
        i += r
    return encoded_size(len(runs), runs, heads, gaps, [b - s for b, s in zip(big, small)], len(big))


def test_codec(ternary, random_small, verdict):
    delta_bad = sum(elias_delta_decode(elias_delta_encode(k)) != k for k in range(1, 10**6 + 1))
    rng = random.Random(61)
    grammar_bad = size_bad = 0
    for trial in range(1000):
        d = 100_000 if trial == 0 else int(10 ** rng.uniform(0, 5))
        g = _random_grammar(rng, d)
        enc = encode_grammar(g)
        back, used, _ = decode_grammar(enc.data, d, 256, enc.nbits)
        grammar_bad += not (np.array_equal(back.left, g.left) and np.array_equal(back.right, g.right))
        size_bad += enc.nbits != _analytic_bits(g) or used != enc.nbits
    over = ternary.runs_over_m + random_small.runs_over_m
    ok = verdict(6, delta_bad == grammar_bad == size_bad == over == 0,
                 f"delta codes 1..10^6 {delta_bad} bad, 1000 grammars {grammar_bad} bad, "
                 f"{size_bad} off the size law, {over} compressions with R > M")
    assert ok


def size_bound(d, M, R):
    if d == 0:
        return 64 * (R + 3)
    return d * (math.log2(d) + math.log2(M) + 1) + M * math.log2(d / M) + 64 * (R + 3) + 2 * d


def _cere_path():
    for p in (os.environ.get("RPAIR_CERE"), "examples/cere", "/root/data/cere"):
        if p and Path(p).is_file():
            return Path(p)
    return None


def test_size_accounting(generated, verdict):
    _, rows = generated
    rows = [r for r in rows if r[1] >= MB]
    data = english_like(MB, seed=9)
    res = compress(data)
    rows.append(("english", MB, archive_stats(build_archive(res.grammar, res.final_text, MB)[0])))
    over = []
    for name, n, st in rows:
        bound = size_bound(st.d, max(st.M, 1), st.R)
        if st.encoded_grammar_bits > bound:
            over.append(name)
    rates = ", ".join(f"{name} {round(n / MB)}MB {st.rate:.2f}%" for name, n, st in rows)
    ok = not over
    detail = f"grammar bits within bound on {len(rows) - len(over)}/{len(rows)} corpora; rates {rates}"
    cere = _cere_path()
    if cere is None:
        detail += "; cere not available, published figures not checked"
    else:
        blob = build_archive(*_compress_pair(cere.read_bytes()))[0]
        st = archive_stats(blob)
        cere_ok = (st.d == CERE_D and st.M == CERE_M and abs(st.rate - CERE_RATE) <= CERE_RATE_TOL)
        ok = ok and cere_ok
        detail += f"; cere d={st.d} M={st.M} rate {st.rate:.2f}%"
    assert verdict(7, ok, detail)


def _compress_pair(data):
    res = compress(data)
    return res.grammar, res.final_text, len(data)


def test_memory_budget(verdict):
    n = 10_000_000
    data = english_like(n)
    res = compress(data, accountant=MemoryAccountant(), engine="stream")
    words = (1.5 + 0.25) * n + 4 * n ** (2 / 3)
    limit = words * 4 + MB
    peak = res.stats.peak_bytes
    assert verdict(8, peak <= limit,
                   f"peak {peak / MB:.2f} MB, limit {limit / MB:.2f} MB ({peak / limit:.3f})")


def test_linear_scaling(verdict):
    sizes = [MB, 2 * MB, 4 * MB, 8 * MB]
    compress(english_like(100_000))
    inputs = [english_like(n) for n in sizes]
    times = [[] for _ in sizes]
    # rounds visit every size so a slow spell on the host is shared out
    for _ in range(3):
        for data, row in zip(inputs, times):
            t0 = time.perf_counter()
            compress(data)
            row.append(time.perf_counter() - t0)
    medians = [statistics.median(row) for row in times]
    ratios = [b / a for a, b in zip(medians, medians[1:])]
    shown = ", ".join(f"{r:.2f}" for r in ratios)
    secs = ", ".join(f"{t:.1f}" for t in medians)
    assert verdict(9, max(ratios) <= SCALING_RATIO,
                   f"median seconds {secs} at 1/2/4/8 MB, ratios {shown} (limit {SCALING_RATIO})")
