import random
from collections import Counter

import numpy as np
import pytest

from rpair.cluster import ClusterTables, cluster
from rpair.text import SkippableText


def _pairs(text, A):
    return [text.pair_starting_at(int(p)) for p in A]


def check_clustered(text, before, A, result):
    """Shared checks: multiset, contiguity, stable-sort grouping, segment table."""
    valid = [p for p in before if p < text.n and not text.is_blank(p) and text.pair_starting_at(p)]
    out = list(A[:result.count])
    assert Counter(out) == Counter(valid)
    prs = _pairs(text, out)
    # contiguous groups in order of first appearance, as a stable sort on first-seen rank would give
    order = list(dict.fromkeys(_pairs(text, valid)))
    expect = [pr for pr in order for _ in range(Counter(_pairs(text, valid))[pr])]
    assert prs == expect
    start = 0
    for pr, s, ln in result:
        assert s == start and prs[s:s + ln] == [pr] * ln
        start += ln
    assert start == result.count


def test_empty():
    text = SkippableText.from_bytes(b"abc")
    tables = ClusterTables(256)
    res = cluster(np.zeros(0, dtype=np.int32), text, tables)
    assert res.count == 0 and len(res) == 0
    assert tables.is_clean()


def test_ababba():
    text = SkippableText.from_bytes(b"ababba")
    A = np.array([0, 1, 2, 3, 4], dtype=np.int32)
    res = cluster(A, text, ClusterTables(256))
    assert list(res) == [((97, 98), 0, 2), ((98, 97), 2, 2), ((98, 98), 4, 1)]
    assert sorted(A) == [0, 1, 2, 3, 4]


def test_single_pair_untouched():
    text = SkippableText.from_bytes(b"ab" * 10)
    A = np.arange(0, 20, 2, dtype=np.int32)
    before = A.copy()
    res = cluster(A, text, ClusterTables(256))
    assert (A == before).all() and len(res) == 1


def test_drops_blank_and_last_positions():
    text = SkippableText.from_bytes(b"abcab")
    text.replace_pair_at(0, 256)
    A = np.array([4, 1, 0, 3, 2], dtype=np.int32)
    res = cluster(A, text, ClusterTables(300))
    assert res.count == 3
    assert sorted(A[:3]) == [0, 2, 3]


@pytest.mark.parametrize("dense", [True, False])
def test_randomized_against_stable_sort(dense):
    rng = random.Random(7 if dense else 8)
    tables = ClusterTables(300, dense_limit=1 << 22 if dense else 0, capacity=16)
    runs = 5000
    for _ in range(runs):
        n = rng.randrange(2, 80)
        text = SkippableText.from_bytes(bytes(rng.randrange(1 + rng.randrange(5)) for _ in range(n)))
        for _ in range(rng.randrange(n // 2 + 1)):
            live = [i for i in range(n) if not text.is_blank(i)]
            if len(live) < 2:
                break
            text.replace_pair_at(rng.choice(live[:-1]), 256 + rng.randrange(40))
        k = rng.randrange(0, 2 * n)
        before = [rng.randrange(n) for _ in range(k)]
        before = list(dict.fromkeys(before))
        A = np.array(before, dtype=np.int32)
        res = cluster(A, text, tables)
        check_clustered(text, before, A, res)
        assert tables.is_clean()
