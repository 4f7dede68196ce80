"""Quadratic reference Re-Pair used to check the real compressor."""
import numpy as np

from .core import SIGMA, Grammar
from .errors import CapacityError
from .pairs import pair_key

MAX_N = 100_000


def pair_counts(seq):
    """Non-overlapping counts of every adjacent pair, greedy from the left."""
    counts = {}
    last = None
    i = 0
    for i in range(len(seq) - 1):
        ab = (seq[i], seq[i + 1])
        if ab[0] == ab[1] and last == i - 1 and seq[i - 1] == ab[0]:
            # this position overlaps the occurrence taken at i-1
            last = None
            continue
        counts[ab] = counts.get(ab, 0) + 1
        last = i if ab[0] == ab[1] else None
    return counts


def replace(seq, ab, x):
    out = []
    i = 0
    n = len(seq)
    while i < n:
        if i + 1 < n and seq[i] == ab[0] and seq[i + 1] == ab[1]:
            out.append(x)
            i += 2
        else:
            out.append(seq[i])
            i += 1
    return out


def naive_compress(data, sigma=SIGMA):
    """Returns ``(Grammar, final_text)`` by full recounting each round."""
    seq = list(data)
    if not seq:
        raise CapacityError("empty input")
    if len(seq) > MAX_N:
        raise CapacityError(f"oracle limited to {MAX_N} symbols")
    left, right, freq = [], [], []
    while True:
        counts = pair_counts(seq)
        if not counts:
            break
        ab, f = min(counts.items(), key=lambda kv: (-kv[1], pair_key(*kv[0])))
        if f < 2:
            break
        x = sigma + len(left)
        left.append(ab[0])
        right.append(ab[1])
        freq.append(f)
        seq = replace(seq, ab, x)
    g = Grammar(sigma, np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(freq, dtype=np.int64), np.zeros(len(left), dtype=np.int64))
    return g, np.array(seq, dtype=np.int64)
