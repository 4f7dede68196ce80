"""Archive container and decompression.

Layout (little endian)::

    "RPSE" | version u8 | flags u8 | sigma u32 | d u64 | t u64 | n u64 | R u64 | crc32 u32
    grammar bits, zero padded to a byte
    final text, ceil(log2(sigma + d)) bits per symbol, zero padded
    [flags bit 0] M u64, then (frequency, rule count) pairs as Elias delta
                  codes in decreasing frequency order, zero padded

The CRC covers everything after the header.
"""
import io
import struct
import zlib
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ._jit import leaf, njit
from .codec import decode_grammar, delta_len, encode_grammar, get_delta, lower_bound, put_delta
from .core import Grammar
from .errors import ArchiveError, DecodeError

MAGIC = b"RPSE"
VERSION = 1
FLAG_FREQS = 1
HEADER = struct.Struct("<4sBBIQQQQI")
HEADER_SIZE = HEADER.size


@dataclass
class ArchiveHeader:
    flags: int
    sigma: int
    d: int
    t: int
    n: int
    R: int
    crc: int


def symbol_width(sigma, d):
    return max(1, (sigma + d - 1).bit_length())


@leaf
def _pack(values, width, buf):
    pos = 0
    for v in values:
        for i in range(width - 1, -1, -1):
            if (v >> i) & 1:
                buf[pos >> 3] |= np.uint8(0x80 >> (pos & 7))
            pos += 1
    return pos


@leaf
def _unpack(buf, offset, width, out):
    pos = offset
    for k in range(out.shape[0]):
        v = 0
        for _ in range(width):
            v = (v << 1) | ((np.int64(buf[pos >> 3]) >> (7 - (pos & 7))) & 1)
            pos += 1
        out[k] = v
    return pos


def pack_symbols(values, width):
    values = np.ascontiguousarray(values, dtype=np.int64)
    buf = np.zeros((len(values) * width + 7) // 8, dtype=np.uint8)
    _pack(values, width, buf)
    return buf.tobytes()


def unpack_symbols(data, count, width):
    buf = np.frombuffer(data, dtype=np.uint8)
    if len(buf) * 8 < count * width:
        raise ArchiveError("final text is truncated")
    out = np.empty(count, dtype=np.int64)
    _unpack(buf, 0, width, out)
    return out


def freq_table(freq):
    """(frequency, rule count) pairs in decreasing frequency order."""
    counts = Counter(np.asarray(freq, dtype=np.int64).tolist())
    return sorted(counts.items(), reverse=True)


def _encode_table(table):
    bits = sum(delta_len(f) + delta_len(c) for f, c in table)
    buf = np.zeros((bits + 7) // 8, dtype=np.uint8)
    pos = 0
    for f, c in table:
        pos = put_delta(buf, pos, f)
        pos = put_delta(buf, pos, c)
    return struct.pack("<Q", len(table)) + buf.tobytes()


def _decode_table(data):
    if len(data) < 8:
        raise ArchiveError("frequency block is truncated")
    (M,) = struct.unpack_from("<Q", data)
    buf = np.frombuffer(data[8:], dtype=np.uint8)
    limit = 8 * len(buf)
    pos = 0
    table = []
    for _ in range(M):
        f, pos = get_delta(buf, pos, limit)
        c, pos = get_delta(buf, pos, limit)
        if f < 0 or c < 0:
            raise ArchiveError("frequency block is truncated")
        table.append((int(f), int(c)))
    return table


@dataclass
class Payload:
    grammar: bytes
    grammar_bits: int
    text: bytes
    text_bits: int
    trailer: bytes


def build_archive(grammar, final_text, n, with_freqs=True, table=None):
    """Serialize; returns ``(archive bytes, header, payload parts)``.

    ``table`` supplies the (frequency, count) block directly, for grammars
    read back from an archive that no longer carry per-rule frequencies.
    """
    sigma = grammar.sigma
    d = grammar.d
    final_text = np.asarray(final_text, dtype=np.int64)
    t = len(final_text)
    if t and (final_text.min() < 0 or final_text.max() >= sigma + d):
        raise ArchiveError("final text refers to an undefined symbol")
    enc = encode_grammar(grammar, sigma)
    width = symbol_width(sigma, d)
    text = pack_symbols(final_text, width)
    flags = 0
    trailer = b""
    if table is None and with_freqs and grammar.freq is not None and len(grammar.freq) == d:
        table = freq_table(grammar.freq)
    if table is not None and with_freqs:
        flags |= FLAG_FREQS
        trailer = _encode_table(table)
    body = enc.data + text + trailer
    crc = zlib.crc32(body) & 0xFFFFFFFF
    head = HEADER.pack(MAGIC, VERSION, flags, sigma, d, t, n, enc.R, crc)
    hdr = ArchiveHeader(flags, sigma, d, t, n, enc.R, crc)
    return head + body, hdr, Payload(enc.data, enc.nbits, text, t * width, trailer)


def write_archive(grammar, final_text, sigma, n, sink, with_freqs=True):
    """Write the archive to a path or binary file object; returns the byte count."""
    if sigma != grammar.sigma:
        raise ArchiveError("alphabet size does not match the grammar")
    data, _, _ = build_archive(grammar, final_text, n, with_freqs)
    if isinstance(sink, (str, bytes)) or hasattr(sink, "__fspath__"):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
    return len(data)


def _read_source(source):
    if isinstance(source, (bytes, bytearray, memoryview)):
        return bytes(source)
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return fh.read()
    return source.read()


def parse_header(data):
    if len(data) < HEADER_SIZE:
        raise ArchiveError("archive shorter than its header")
    magic, version, flags, sigma, d, t, n, R, crc = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ArchiveError("bad magic")
    if version != VERSION:
        raise ArchiveError(f"unsupported version {version}")
    if t > n or sigma + d > 1 << 31 or sigma < 1 or (n > 0 and t == 0):
        raise ArchiveError("inconsistent header counts")
    return ArchiveHeader(flags, sigma, d, t, n, R, crc)


@dataclass
class Archive:
    header: ArchiveHeader
    grammar: Grammar
    final_text: np.ndarray
    grammar_bits: int
    text_bits: int
    freq_table: list
    size: int


def read_archive(source):
    data = _read_source(source)
    h = parse_header(data)
    body = data[HEADER_SIZE:]
    if zlib.crc32(body) & 0xFFFFFFFF != h.crc:
        raise ArchiveError("crc mismatch")
    try:
        g, used, R = decode_grammar(body, h.d, h.sigma)
    except DecodeError as e:
        raise ArchiveError(str(e)) from None
    if R != h.R:
        raise ArchiveError("run count differs from header")
    off = (used + 7) // 8
    width = symbol_width(h.sigma, h.d)
    tbytes = (h.t * width + 7) // 8
    final = unpack_symbols(body[off:off + tbytes], h.t, width)
    if h.t and final.max() >= h.sigma + h.d:
        raise ArchiveError("final text refers to an undefined symbol")
    rest = body[off + tbytes:]
    table = []
    if h.flags & FLAG_FREQS:
        table = _decode_table(rest)
        if sum(c for _, c in table) != h.d:
            raise ArchiveError("frequency block does not cover every rule")
    elif rest:
        raise ArchiveError("trailing bytes after final text")
    return Archive(h, g, final, used, h.t * width, table, len(data))


@njit
def _lengths(left, right, sigma):
    d = left.shape[0]
    ln = np.empty(d, dtype=np.int64)
    for i in range(d):
        a = left[i]
        b = right[i]
        la = 1 if a < sigma else ln[a - sigma]
        lb = 1 if b < sigma else ln[b - sigma]
        ln[i] = la + lb
    return ln


@njit
def _expand(left, right, sigma, text, out):
    stack = np.empty(64, dtype=np.int64)
    k = 0
    for s in text:
        top = 0
        stack[0] = s
        top = 1
        while top > 0:
            top -= 1
            x = stack[top]
            while x >= sigma:
                if top + 1 >= stack.shape[0]:
                    bigger = np.empty(2 * stack.shape[0], dtype=np.int64)
                    bigger[:top] = stack[:top]
                    stack = bigger
                stack[top] = right[x - sigma]
                top += 1
                x = left[x - sigma]
            out[k] = x
            k += 1
    return k


def expand(grammar, text, n=None):
    """Expand ``text`` through ``grammar`` into a uint8 array (for byte alphabets)."""
    left, right = (np.ascontiguousarray(a, dtype=np.int64) for a in (grammar.left, grammar.right))
    text = np.ascontiguousarray(text, dtype=np.int64)
    grammar.check()
    lens = _lengths(left, right, grammar.sigma)
    big = text >= grammar.sigma
    total = int((~big).sum() + lens[text[big] - grammar.sigma].sum())
    if n is not None and total != n:
        raise ArchiveError(f"expansion has {total} symbols, header says {n}")
    out = np.empty(total, dtype=np.uint8 if grammar.sigma <= 256 else np.int64)
    _expand(left, right, grammar.sigma, text, out)
    return out


def decompress(source):
    arc = read_archive(source)
    return expand(arc.grammar, arc.final_text, arc.header.n).tobytes()


@dataclass
class ArchiveStats:
    n: int
    sigma: int
    d: int
    t: int
    M: int
    R: int
    encoded_grammar_bits: int
    encoded_text_bits: int
    encoded_bits: int
    archive_bytes: int
    lower_bound_bits: float
    rate: float

    def as_dict(self):
        return dict(self.__dict__)

    def row(self):
        m = "-" if self.M is None else str(self.M)
        return (f"{'n':>12} {'d':>10} {'M':>8} {'t':>10} {'lower bound':>14} {'rp':>14} {'rate (%)':>9}\n"
                f"{self.n:>12} {self.d:>10} {m:>8} {self.t:>10} "
                f"{self.lower_bound_bits / 8:>14.0f} {self.encoded_bits / 8:>14.0f} {self.rate:>9.2f}")


def rate_of(encoded_bits, d, t, sigma):
    """Encoded size as a percentage of the lower bound.

    Without rules the bound is t log2(sigma) = n log2(sigma).
    """
    lb = lower_bound(d, t, sigma)
    return lb, (100.0 * encoded_bits / lb if lb else 0.0)


def archive_stats(source):
    arc = read_archive(source)
    h = arc.header
    M = len(arc.freq_table) if h.flags & FLAG_FREQS else None
    bits = arc.grammar_bits + arc.text_bits
    lb, rate = rate_of(bits, h.d, h.t, h.sigma)
    return ArchiveStats(h.n, h.sigma, h.d, h.t, M, h.R, arc.grammar_bits, arc.text_bits, bits,
                        arc.size, lb, rate)


stats = archive_stats


def dumps(grammar, final_text, n):
    return build_archive(grammar, final_text, n)[0]


def loads(data):
    return decompress(io.BytesIO(data))
