"""In-place sorts for compiled code that must not allocate.

Both are introsorts: Hoare partitioning around a median of three, insertion
sort for short ranges, and a heapsort fallback once a range has been split
too often, so adversarial orders stay O(n log n). Input that is already in
order is detected up front and left alone, which is the common case for
occurrence lists built by a left-to-right scan.

``stack`` needs ``STACK`` entries. The larger side of each split is the one
deferred, so at most log2(hi - lo) ranges are pending, three words each.
"""
from ._jit import leaf

STACK = 192
SMALL = 16


@leaf
def _sift(a, lo, root, end):
    v = a[lo + root]
    while True:
        c = 2 * root + 1
        if c >= end:
            break
        if c + 1 < end and a[lo + c + 1] > a[lo + c]:
            c += 1
        if a[lo + c] <= v:
            break
        a[lo + root] = a[lo + c]
        root = c
    a[lo + root] = v


@leaf
def _heapsort(a, lo, hi):
    n = hi - lo
    for r in range(n // 2 - 1, -1, -1):
        _sift(a, lo, r, n)
    for end in range(n - 1, 0, -1):
        v = a[lo]
        a[lo] = a[lo + end]
        a[lo + end] = v
        _sift(a, lo, 0, end)


@leaf
def depth_limit(n):
    """Splits allowed before a range of ``n`` falls back to heapsort."""
    d = 0
    while n > 1:
        n >>= 1
        d += 2
    return d + 2


@leaf
def sort_range(a, lo, hi, stack):
    """Sort ``a[lo:hi]`` ascending."""
    done = True
    for i in range(lo + 1, hi):
        if a[i - 1] > a[i]:
            done = False
            break
    if done:
        return
    stack[0] = lo
    stack[1] = hi
    stack[2] = depth_limit(hi - lo)
    top = 1
    while top > 0:
        top -= 1
        l = stack[3 * top]
        h = stack[3 * top + 1]
        depth = stack[3 * top + 2]
        while h - l > SMALL:
            if depth == 0:
                _heapsort(a, l, h)
                l = h
                break
            depth -= 1
            m = l + (h - l) // 2
            if a[m] < a[l]:
                v = a[m]
                a[m] = a[l]
                a[l] = v
            if a[h - 1] < a[m]:
                v = a[m]
                a[m] = a[h - 1]
                a[h - 1] = v
                if a[m] < a[l]:
                    v = a[m]
                    a[m] = a[l]
                    a[l] = v
            pivot = a[m]
            i = l
            j = h - 1
            while True:
                i += 1
                while a[i] < pivot:
                    i += 1
                j -= 1
                while a[j] > pivot:
                    j -= 1
                if i >= j:
                    break
                v = a[i]
                a[i] = a[j]
                a[j] = v
            k = j + 1
            if k - l < h - k:
                stack[3 * top] = k
                stack[3 * top + 1] = h
                stack[3 * top + 2] = depth
                top += 1
                h = k
            else:
                stack[3 * top] = l
                stack[3 * top + 1] = k
                stack[3 * top + 2] = depth
                top += 1
                l = k
        for i in range(l + 1, h):
            v = a[i]
            j = i - 1
            while j >= l and a[j] > v:
                a[j + 1] = a[j]
                j -= 1
            a[j + 1] = v


@leaf
def _asift(keys, idx, lo, root, end):
    v = idx[lo + root]
    kv = keys[v]
    while True:
        c = 2 * root + 1
        if c >= end:
            break
        if c + 1 < end and keys[idx[lo + c + 1]] > keys[idx[lo + c]]:
            c += 1
        if keys[idx[lo + c]] <= kv:
            break
        idx[lo + root] = idx[lo + c]
        root = c
    idx[lo + root] = v


@leaf
def _aheapsort(keys, idx, lo, hi):
    n = hi - lo
    for r in range(n // 2 - 1, -1, -1):
        _asift(keys, idx, lo, r, n)
    for end in range(n - 1, 0, -1):
        v = idx[lo]
        idx[lo] = idx[lo + end]
        idx[lo + end] = v
        _asift(keys, idx, lo, 0, end)


@leaf
def argsort_range(keys, idx, lo, hi, stack):
    """Reorder ``idx[lo:hi]`` so that ``keys[idx[...]]`` ascends."""
    done = True
    for i in range(lo + 1, hi):
        if keys[idx[i - 1]] > keys[idx[i]]:
            done = False
            break
    if done:
        return
    stack[0] = lo
    stack[1] = hi
    stack[2] = depth_limit(hi - lo)
    top = 1
    while top > 0:
        top -= 1
        l = stack[3 * top]
        h = stack[3 * top + 1]
        depth = stack[3 * top + 2]
        while h - l > SMALL:
            if depth == 0:
                _aheapsort(keys, idx, l, h)
                l = h
                break
            depth -= 1
            m = l + (h - l) // 2
            if keys[idx[m]] < keys[idx[l]]:
                v = idx[m]
                idx[m] = idx[l]
                idx[l] = v
            if keys[idx[h - 1]] < keys[idx[m]]:
                v = idx[m]
                idx[m] = idx[h - 1]
                idx[h - 1] = v
                if keys[idx[m]] < keys[idx[l]]:
                    v = idx[m]
                    idx[m] = idx[l]
                    idx[l] = v
            pivot = keys[idx[m]]
            i = l
            j = h - 1
            while True:
                i += 1
                while keys[idx[i]] < pivot:
                    i += 1
                j -= 1
                while keys[idx[j]] > pivot:
                    j -= 1
                if i >= j:
                    break
                v = idx[i]
                idx[i] = idx[j]
                idx[j] = v
            k = j + 1
            if k - l < h - k:
                stack[3 * top] = k
                stack[3 * top + 1] = h
                stack[3 * top + 2] = depth
                top += 1
                h = k
            else:
                stack[3 * top] = l
                stack[3 * top + 1] = k
                stack[3 * top + 2] = depth
                top += 1
                l = k
        for i in range(l + 1, h):
            v = idx[i]
            kv = keys[v]
            j = i - 1
            while j >= l and keys[idx[j]] > kv:
                idx[j + 1] = idx[j]
                j -= 1
            idx[j + 1] = v
