"""Grammar encoding.

Rules come out of the compressor in an order where, within one frequency
class, the larger symbol of each rule never decreases. The encoder splits
the sequence of larger symbols into maximal non-decreasing runs and writes,
all as Elias delta codes (MSB first):

    R | per run: length, head + 1, (gap + 1) for each later element
      | |a - b| + 1 for every rule | one bit per rule, set iff a > b

An empty grammar has an empty payload.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._jit import leaf, njit
from .core import Grammar
from .errors import ContractError, DecodeError

OK = 0
TRUNCATED = 1
INVALID = 2


@leaf
def bitlen(x):
    n = 0
    while x > 0:
        x >>= 1
        n += 1
    return n


@leaf
def delta_len(k):
    n = bitlen(k)
    return 2 * (bitlen(n) - 1) + n


@leaf
def put_bits(buf, pos, value, nbits):
    for i in range(nbits - 1, -1, -1):
        if (value >> i) & 1:
            buf[pos >> 3] |= np.uint8(0x80 >> (pos & 7))
        pos += 1
    return pos


@leaf
def put_delta(buf, pos, k):
    n = bitlen(k)
    L = bitlen(n) - 1
    pos += L
    pos = put_bits(buf, pos, n, L + 1)
    return put_bits(buf, pos, k, n - 1)


@leaf
def get_bit(buf, pos):
    return (np.int64(buf[pos >> 3]) >> (7 - (pos & 7))) & 1


@leaf
def get_delta(buf, pos, limit):
    """Decode one code at ``pos``; returns (value, new pos), value -1 if truncated."""
    L = 0
    while True:
        if pos >= limit:
            return -1, pos
        if get_bit(buf, pos):
            break
        L += 1
        pos += 1
        if L > 6:
            return -1, pos
    if pos + L + 1 > limit:
        return -1, pos
    n = 0
    for _ in range(L + 1):
        n = (n << 1) | get_bit(buf, pos)
        pos += 1
    if n > 63 or pos + n - 1 > limit:
        return -1, pos
    k = 1
    for _ in range(n - 1):
        k = (k << 1) | get_bit(buf, pos)
        pos += 1
    return k, pos


@leaf
def run_starts(left, right, starts):
    """Fill ``starts`` with the first index of every maximal non-decreasing run; returns R."""
    d = left.shape[0]
    R = 0
    prev = -1
    for i in range(d):
        m = max(left[i], right[i])
        if i == 0 or m < prev:
            starts[R] = i
            R += 1
        prev = m
    return R


@leaf
def layout_bits(left, right, starts, R):
    d = left.shape[0]
    if d == 0:
        return 0
    bits = delta_len(R) + d
    for r in range(R):
        s = starts[r]
        e = starts[r + 1] if r + 1 < R else d
        bits += delta_len(e - s) + delta_len(max(left[s], right[s]) + 1)
        prev = max(left[s], right[s])
        for i in range(s + 1, e):
            m = max(left[i], right[i])
            bits += delta_len(m - prev + 1)
            prev = m
    for i in range(d):
        bits += delta_len(abs(left[i] - right[i]) + 1)
    return bits


@leaf
def encode_into(left, right, starts, R, buf):
    d = left.shape[0]
    if d == 0:
        return 0
    pos = put_delta(buf, 0, R)
    for r in range(R):
        s = starts[r]
        e = starts[r + 1] if r + 1 < R else d
        pos = put_delta(buf, pos, e - s)
        prev = max(left[s], right[s])
        pos = put_delta(buf, pos, prev + 1)
        for i in range(s + 1, e):
            m = max(left[i], right[i])
            pos = put_delta(buf, pos, m - prev + 1)
            prev = m
    for i in range(d):
        pos = put_delta(buf, pos, abs(left[i] - right[i]) + 1)
    for i in range(d):
        if left[i] > right[i]:
            buf[pos >> 3] |= np.uint8(0x80 >> (pos & 7))
        pos += 1
    return pos


@leaf
def decode_into(buf, limit, sigma, left, right):
    """Inverse of ``encode_into`` for ``d = left.shape[0]`` rules.

    Returns (status, bits consumed, R).
    """
    d = left.shape[0]
    if d == 0:
        return OK, 0, 0
    R, pos = get_delta(buf, 0, limit)
    if R < 0:
        return TRUNCATED, pos, 0
    if R > d:
        return INVALID, pos, R
    i = 0
    for _ in range(R):
        ln, pos = get_delta(buf, pos, limit)
        if ln < 0:
            return TRUNCATED, pos, R
        if i + ln > d:
            return INVALID, pos, R
        v, pos = get_delta(buf, pos, limit)
        if v < 0:
            return TRUNCATED, pos, R
        m = v - 1
        left[i] = m
        i += 1
        for _ in range(ln - 1):
            g, pos = get_delta(buf, pos, limit)
            if g < 0:
                return TRUNCATED, pos, R
            m += g - 1
            left[i] = m
            i += 1
    if i != d:
        return INVALID, pos, R
    for i in range(d):
        v, pos = get_delta(buf, pos, limit)
        if v < 0:
            return TRUNCATED, pos, R
        right[i] = left[i] - (v - 1)
    if pos + d > limit:
        return TRUNCATED, pos, R
    for i in range(d):
        big = left[i]
        small = right[i]
        if big >= sigma + i or small < 0:
            return INVALID, pos, R
        if get_bit(buf, pos):
            if big == small:
                return INVALID, pos, R
        else:
            left[i] = small
            right[i] = big
        pos += 1
    return OK, pos, R


def elias_delta_encode(k):
    """Elias delta codeword of ``k >= 1`` as a string of '0'/'1'."""
    if k < 1:
        raise ContractError("Elias delta needs k >= 1")
    n = k.bit_length()
    L = n.bit_length() - 1
    return "0" * L + format(n, "b") + format(k, "b")[1:]


def elias_delta_decode(bits):
    """Decode one codeword from the front of a '0'/'1' string."""
    L = 0
    while L < len(bits) and bits[L] == "0":
        L += 1
    head = bits[L:2 * L + 1]
    if len(head) < L + 1:
        raise DecodeError("truncated Elias delta code")
    n = int(head, 2)
    body = bits[2 * L + 1:2 * L + n]
    if len(body) < n - 1:
        raise DecodeError("truncated Elias delta code")
    return int("1" + body, 2)


def monotone_runs(values):
    """Lengths of the maximal non-decreasing runs of ``values``."""
    runs = []
    prev = None
    for v in values:
        if prev is None or v < prev:
            runs.append(0)
        runs[-1] += 1
        prev = v
    return runs


@dataclass
class EncodedGrammar:
    data: bytes
    nbits: int
    d: int
    R: int
    run_lengths: list

    @property
    def nbytes(self):
        return len(self.data)


def _arrays(g):
    left = np.ascontiguousarray(g.left, dtype=np.int64)
    right = np.ascontiguousarray(g.right, dtype=np.int64)
    return left, right


def encode_grammar(g, sigma=None):
    sigma = g.sigma if sigma is None else sigma
    left, right = _arrays(g)
    if left.shape != right.shape:
        raise ContractError("left and right sides differ in length")
    Grammar(sigma, left, right, g.freq).check()
    d = len(left)
    starts = np.empty(max(d, 1), dtype=np.int64)
    R = int(run_starts(left, right, starts))
    nbits = int(layout_bits(left, right, starts, R))
    buf = np.zeros((nbits + 7) // 8, dtype=np.uint8)
    written = int(encode_into(left, right, starts, R, buf))
    if written != nbits:
        raise AssertionError(f"encoder wrote {written} bits, layout says {nbits}")
    bounds = starts[:R].tolist() + [d]
    return EncodedGrammar(buf.tobytes(), nbits, d, R, [b - a for a, b in zip(bounds, bounds[1:])])


def encoded_size(R, run_lengths, heads, gaps, diffs, d):
    """Bit count of the layout given its parts (gaps flattened over runs)."""
    if d == 0:
        return 0
    dl = lambda k: 2 * (k.bit_length().bit_length() - 1) + k.bit_length()
    return (dl(R) + sum(dl(x) for x in run_lengths) + sum(dl(h + 1) for h in heads)
            + sum(dl(g + 1) for g in gaps) + sum(dl(x + 1) for x in diffs) + d)


def decode_grammar(data, d, sigma, nbits=None, freq=None):
    """Decode ``d`` rules; returns ``(Grammar, bits consumed, R)``."""
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    limit = 8 * len(buf) if nbits is None else nbits
    left = np.zeros(d, dtype=np.int64)
    right = np.zeros(d, dtype=np.int64)
    status, used, R = decode_into(buf, limit, sigma, left, right)
    if status == TRUNCATED:
        raise DecodeError("grammar stream is truncated")
    if status == INVALID:
        raise DecodeError("grammar stream is malformed or refers forward")
    f = np.zeros(d, dtype=np.int64) if freq is None else np.asarray(freq, dtype=np.int64)
    return Grammar(sigma, left, right, f), int(used), int(R)


def log2_factorial(d):
    if d < 2:
        return 0.0
    if d <= 1_000_000:
        return float(np.log2(np.arange(2, d + 1, dtype=np.float64)).sum())
    return (d * math.log(d) - d + 0.5 * math.log(2 * math.pi * d) + 1 / (12 * d)) / math.log(2)


def lower_bound(d, t, sigma):
    """log2(d!) + 2d + t log2(sigma + d) bits."""
    return log2_factorial(d) + 2 * d + t * math.log2(sigma + d)
