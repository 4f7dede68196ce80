"""Byte accounting for the compressor's working arrays."""
import math

WORD = 4
MB = 1 << 20


class MemoryAccountant:
    """Tracks named allocations and the peak of their sum.

    ``observe`` adds a transient amount (for instance bucket payloads grown
    inside a compiled kernel) on top of the current total without keeping it.
    """

    def __init__(self):
        self.live = {}
        self.current = 0
        self.peak = 0
        self.peak_items = {}

    def alloc(self, name, nbytes):
        self.free(name)
        self.live[name] = int(nbytes)
        self.current += int(nbytes)
        self._bump(0)

    def track(self, name, *arrays):
        self.alloc(name, sum(a.nbytes for a in arrays))
        return arrays[0] if len(arrays) == 1 else arrays

    def free(self, name):
        self.current -= self.live.pop(name, 0)

    def observe(self, name, nbytes):
        self._bump(int(nbytes), name)

    def _bump(self, extra, name=None):
        total = self.current + extra
        if total > self.peak:
            self.peak = total
            self.peak_items = dict(self.live)
            if name is not None:
                self.peak_items[name] = extra

    def peak_words(self):
        return self.peak / WORD


def budget_bytes(n, epsilon):
    """(1.5 + epsilon) n words, plus 4 n^(2/3) words and 1 MB of slack."""
    return int(((1.5 + epsilon) * n + 4 * n ** (2 / 3)) * WORD) + MB


def icbrt_ceil(x):
    """Smallest integer c with c**3 >= x."""
    if x <= 0:
        return 0
    c = int(round(x ** (1 / 3)))
    while c ** 3 < x:
        c += 1
    while c > 0 and (c - 1) ** 3 >= x:
        c -= 1
    return c


def cutoff_for(n):
    """Frequency threshold separating high and low frequency pairs: ceil(n^(2/3))."""
    return icbrt_ceil(n * n)


def universe_for(n, sigma):
    """Symbols that can exist while high-frequency pairs remain."""
    return sigma + icbrt_ceil(n)


def log2(x):
    return math.log2(x)
