"""Pair keys.

A pair ``(a, b)`` is packed as ``max << 32 | min << 1 | (a > b)``. Sorting
keys numerically therefore orders pairs by the larger symbol first, then
the smaller one, then the left symbol; this is the extraction order among
pairs of equal frequency.
"""
from ._jit import leaf


@leaf
def pkey(a, b):
    if a > b:
        return (a << 32) | (b << 1) | 1
    return (b << 32) | (a << 1)


@leaf
def unkey(k):
    hi = k >> 32
    lo = (k >> 1) & 0x7FFFFFFF
    if k & 1:
        return hi, lo
    return lo, hi


@leaf
def khash(k):
    h = ((k >> 32) * 0x9E3779B1) ^ ((k & 0xFFFFFFFF) * 0x85EBCA77)
    h ^= h >> 29
    h ^= h >> 13
    return h


def pair_key(a, b):
    return int(pkey(a, b))


def key_pair(k):
    a, b = unkey(k)
    return int(a), int(b)
