"""Direct-access queue for high-frequency pairs.

A ``u x u`` table of ``(P, L, F)`` records; ``F == 0`` marks an empty
cell. ``max`` is a full scan, which is affordable because it runs at most
once per high-frequency pair.
"""
import numpy as np

from ._jit import leaf, njit
from .errors import ContractError
from .pairs import pkey


@leaf
def hf_max(F, u):
    """Slot of the most frequent pair; ties go to the smallest pair key."""
    best = -1
    best_f = 0
    best_k = 0
    for s in range(F.shape[0]):
        f = F[s]
        if f == 0 or f < best_f:
            continue
        k = pkey(np.int64(s // u), np.int64(s % u))
        if f > best_f or k < best_k:
            best, best_f, best_k = s, f, k
    return best


class HFQueue:
    def __init__(self, universe):
        self.u = int(universe)
        size = self.u * self.u
        self.P = np.zeros(size, dtype=np.int32)
        self.L = np.zeros(size, dtype=np.int32)
        self.F = np.zeros(size, dtype=np.int32)
        self.max_calls = 0

    def nbytes(self):
        return self.P.nbytes + self.L.nbytes + self.F.nbytes

    def _slot(self, ab):
        a, b = ab
        if not (0 <= a < self.u and 0 <= b < self.u):
            raise ContractError(f"pair {ab} outside universe {self.u}")
        return a * self.u + b

    def __contains__(self, ab):
        return self.F[self._slot(ab)] > 0

    contains = __contains__

    def get(self, ab):
        s = self._slot(ab)
        if self.F[s] == 0:
            return None
        return int(self.P[s]), int(self.L[s]), int(self.F[s])

    def insert(self, ab, P, L, F):
        s = self._slot(ab)
        if self.F[s] != 0:
            raise ContractError(f"pair {ab} already queued")
        if F < 1:
            raise ContractError("frequency must be positive")
        self.P[s], self.L[s], self.F[s] = P, L, F

    def decrease(self, ab):
        s = self._slot(ab)
        if self.F[s] == 0:
            raise ContractError(f"pair {ab} not queued")
        self.F[s] -= 1
        if self.F[s] == 0:
            self.P[s] = self.L[s] = 0

    def remove(self, ab):
        s = self._slot(ab)
        if self.F[s] == 0:
            raise ContractError(f"pair {ab} not queued")
        self.P[s] = self.L[s] = self.F[s] = 0

    def max(self):
        self.max_calls += 1
        s = int(hf_max(self.F, self.u))
        if s < 0:
            return None
        return divmod(s, self.u)
