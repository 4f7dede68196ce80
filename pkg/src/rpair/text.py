"""Rewritable text with blanks.

Symbols live in 16-bit cells. A replacement ``ab -> X`` at position ``i``
always leaves ``i+1`` blank, so a symbol whose right neighbour cell is
blank is read as a 32-bit value spanning ``cells[i:i+2]``. An occupancy
bitvector (32-bit words) marks the non-blank positions; blank runs longer
than a word are skipped through length tables anchored at the block
holding the run's first position (``rstart``) and last position
(``rend``).

The kernels take the four arrays as a tuple ``T = (cells, occ, rstart,
rend)`` so that they can be threaded through the compressor cheaply.
"""
import numpy as np

from ._jit import leaf, njit
from .errors import AlphabetError, CapacityError, PositionError

W = 32
MAX_N = (1 << 31) - 1
NONE = -1

_DEBRUIJN = np.array(
    [0, 1, 28, 2, 29, 14, 24, 3, 30, 22, 20, 15, 25, 17, 4, 8,
     31, 27, 13, 23, 21, 19, 16, 7, 26, 12, 18, 6, 11, 5, 10, 9],
    dtype=np.int64,
)


@leaf
def ctz32(x):
    """Index of the lowest set bit of a non-zero 32-bit value."""
    low = x & -x
    return _DEBRUIJN[((low * 0x077CB531) & 0xFFFFFFFF) >> 27]


@leaf
def msb32(x):
    """Index of the highest set bit of a non-zero 32-bit value."""
    x |= x >> 1
    x |= x >> 2
    x |= x >> 4
    x |= x >> 8
    x |= x >> 16
    return ctz32((x + 1) >> 1) if x != 0xFFFFFFFF else 31


@leaf
def is_set(T, i):
    return (np.int64(T[1][i >> 5]) >> (i & 31)) & 1


@leaf
def sym(T, i):
    cells = T[0]
    n = cells.shape[0]
    if i + 1 < n and ((np.int64(T[1][(i + 1) >> 5]) >> ((i + 1) & 31)) & 1) == 0:
        return np.int64(cells[i]) | (np.int64(cells[i + 1]) << 16)
    return np.int64(cells[i])


@leaf
def _scan_forward(T, j):
    # first set bit at position >= j, word by word
    occ = T[1]
    n = T[0].shape[0]
    w = j >> 5
    if w >= occ.shape[0]:
        return NONE
    word = np.int64(occ[w]) >> (j & 31)
    if word != 0:
        k = j + ctz32(word)
        return k if k < n else NONE
    w += 1
    while w < occ.shape[0]:
        word = np.int64(occ[w])
        if word != 0:
            k = (w << 5) + ctz32(word)
            return k if k < n else NONE
        w += 1
    return NONE


@leaf
def _scan_backward(T, j):
    occ = T[1]
    w = j >> 5
    word = np.int64(occ[w]) & ((np.int64(2) << (j & 31)) - 1)
    if word != 0:
        return (w << 5) + msb32(word)
    w -= 1
    while w >= 0:
        word = np.int64(occ[w])
        if word != 0:
            return (w << 5) + msb32(word)
        w -= 1
    return NONE


@leaf
def next_nb(T, i):
    """Nearest non-blank position after ``i`` (``-1`` if none)."""
    cells, occ, rstart = T[0], T[1], T[2]
    n = cells.shape[0]
    j = i + 1
    if j >= n:
        return NONE
    if ((np.int64(occ[i >> 5]) >> (i & 31)) & 1) == 0:
        return _scan_forward(T, j)
    w = j >> 5
    word = np.int64(occ[w]) >> (j & 31)
    if word != 0:
        k = j + ctz32(word)
        return k if k < n else NONE
    if w + 1 < occ.shape[0]:
        word = np.int64(occ[w + 1])
        if word != 0:
            k = ((w + 1) << 5) + ctz32(word)
            return k if k < n else NONE
    # the run starting at j is longer than a word
    k = j + np.int64(rstart[w])
    if rstart[w] == 0 or k > n:
        return _scan_forward(T, j)
    return k if k < n else NONE


@leaf
def prev_nb(T, i):
    """Nearest non-blank position before ``i`` (``-1`` if none)."""
    occ, rend = T[1], T[3]
    j = i - 1
    if j < 0:
        return NONE
    if ((np.int64(occ[i >> 5]) >> (i & 31)) & 1) == 0:
        return _scan_backward(T, j)
    w = j >> 5
    word = np.int64(occ[w]) & ((np.int64(2) << (j & 31)) - 1)
    if word != 0:
        return (w << 5) + msb32(word)
    if w > 0:
        word = np.int64(occ[w - 1])
        if word != 0:
            return ((w - 1) << 5) + msb32(word)
    if rend[w] == 0 or j - np.int64(rend[w]) < 0:
        return _scan_backward(T, j)
    return j - np.int64(rend[w])


@leaf
def pair_at(T, i):
    """(a, b, position of b) for the pair starting at non-blank ``i``; b=-1 if none."""
    j = next_nb(T, i)
    if j < 0:
        return sym(T, i), NONE, NONE
    return sym(T, i), sym(T, j), j


@leaf
def replace_at(T, i, b, x):
    """Write ``x`` at ``i`` and blank the pair's second symbol at ``b``."""
    cells, occ, rstart, rend = T
    n = cells.shape[0]
    k = next_nb(T, b)
    if k < 0:
        k = n
    left = b - 1 - i
    if left > W:
        rstart[(i + 1) >> 5] = 0
        rend[(b - 1) >> 5] = 0
    right = k - 1 - b
    if right > W:
        rstart[(b + 1) >> 5] = 0
        rend[(k - 1) >> 5] = 0
    occ[b >> 5] &= ~np.uint32(1 << (b & 31))
    run = k - 1 - i
    if run > W:
        rstart[(i + 1) >> 5] = run
        rend[(k - 1) >> 5] = run
    cells[i] = x & 0xFFFF
    cells[i + 1] = x >> 16


@njit
def extract(T):
    n = T[0].shape[0]
    count = 0
    for w in range(T[1].shape[0]):
        v = np.int64(T[1][w])
        while v != 0:
            v &= v - 1
            count += 1
    out = np.empty(count, dtype=np.int64)
    i = 0
    k = 0
    while i >= 0 and i < n:
        out[k] = sym(T, i)
        k += 1
        i = next_nb(T, i)
    return out


@njit
def build_text(arr):
    n = arr.shape[0]
    cells = arr.astype(np.uint16)
    nw = (n + W - 1) // W + 1
    occ = np.zeros(nw, dtype=np.uint32)
    full = n // W
    rest = n % W
    occ[:full] = 0xFFFFFFFF
    if rest:
        occ[full] = (1 << rest) - 1
    rstart = np.zeros(nw, dtype=np.int32)
    rend = np.zeros(nw, dtype=np.int32)
    return (cells, occ, rstart, rend)


def as_codes(data, sigma=256):
    """Validate input and return it as an integer array."""
    arr = np.frombuffer(data, dtype=np.uint8) if isinstance(data, (bytes, bytearray, memoryview)) \
        else np.asarray(data, dtype=np.int64)
    n = arr.shape[0]
    if n == 0:
        raise CapacityError("empty input")
    if n > MAX_N:
        raise CapacityError(f"input of {n} symbols exceeds 2^31-1")
    if sigma > 1 << 16:
        raise AlphabetError("alphabet must fit a 16-bit cell")
    top = int(arr.max())
    if top >= sigma or int(arr.min()) < 0:
        raise AlphabetError(f"symbol {top} outside alphabet of size {sigma}")
    return arr


def text_arrays(data, sigma=256):
    """Build the kernel tuple for a byte string (or int sequence)."""
    return build_text(as_codes(data, sigma))


class SkippableText:
    """Python face of the blank-skipping text used by the compressor."""

    def __init__(self, T, sigma):
        self.T = T
        self.sigma = sigma

    @classmethod
    def from_bytes(cls, data, sigma=256):
        return cls(text_arrays(data, sigma), sigma)

    def __len__(self):
        return self.T[0].shape[0]

    @property
    def n(self):
        return len(self)

    def nbytes(self):
        return sum(a.nbytes for a in self.T)

    def is_blank(self, i):
        self._check(i)
        return not is_set(self.T, i)

    def symbol(self, i):
        if self.is_blank(i):
            raise PositionError(f"position {i} is blank")
        return int(sym(self.T, i))

    def pair_starting_at(self, i):
        if self.is_blank(i):
            raise PositionError(f"position {i} is blank")
        a, b, _ = pair_at(self.T, i)
        return None if b < 0 else (int(a), int(b))

    def replace_pair_at(self, i, x):
        if self.is_blank(i):
            raise PositionError(f"position {i} is blank")
        j = next_nb(self.T, i)
        if j < 0:
            raise PositionError(f"no pair starts at {i}")
        if not 0 <= x < 1 << 31:
            raise AlphabetError(f"symbol {x} out of range")
        replace_at(self.T, i, j, x)

    def next_nonblank(self, i):
        self._check(i)
        j = next_nb(self.T, i)
        return None if j < 0 else int(j)

    def prev_nonblank(self, i):
        self._check(i)
        j = prev_nb(self.T, i)
        return None if j < 0 else int(j)

    def extract_final_text(self):
        return extract(self.T)

    def _check(self, i):
        if not 0 <= i < len(self):
            raise PositionError(f"position {i} outside [0, {len(self)})")
