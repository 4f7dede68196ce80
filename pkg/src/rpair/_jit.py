"""Numba switch.

Set ``RPAIR_DISABLE_JIT=1`` before import to run every kernel as plain
Python over numpy arrays (slow, but handy for debugging and for checking
that the compiled path and the interpreted path agree).
"""
import hashlib
import os
from pathlib import Path

import numpy as np

JIT_ENABLED = os.environ.get("RPAIR_DISABLE_JIT", "0") not in ("1", "true", "yes")

if JIT_ENABLED:
    try:
        import numba
        from numba.typed import List as _TypedList
    except ImportError:  # pragma: no cover
        JIT_ENABLED = False


def _drop_stale_cache():
    # numba keys a cached function on its own file only, so machine code
    # inlined from a helper in another module outlives edits to that helper
    here = Path(__file__).parent
    digest = hashlib.sha1()
    for src in sorted(here.glob("*.py")):
        digest.update(src.read_bytes())
    cache = here / "__pycache__"
    stamp = cache / "numba-sources.sha1"
    try:
        if stamp.exists() and stamp.read_text() == digest.hexdigest():
            return
        cache.mkdir(exist_ok=True)
        for f in list(cache.glob("*.nbi")) + list(cache.glob("*.nbc")):
            f.unlink()
        stamp.write_text(digest.hexdigest())
    except OSError:
        pass


if JIT_ENABLED:
    _drop_stale_cache()

_numba_default = {"nopython": True, "nogil": True, "cache": True, "boundscheck": False}


def leaf(fn):
    """Compile a helper that skips reference counting.

    Reference counting costs a pair of atomic operations per array argument
    on every call, which dominates small helpers taking the queue tuples.
    Leaf helpers must not allocate, and may hand arrays back only to other
    leaf helpers: a counted caller would release a reference it never got.
    """
    return njit(_nrt=False)(fn)


def njit(*args, **kwargs):
    if not JIT_ENABLED:
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f
    opts = dict(_numba_default)
    opts.update(kwargs)
    if len(args) == 1 and callable(args[0]):
        return numba.jit(**opts)(args[0])
    return numba.jit(**opts)


EMPTY_I64 = np.zeros(0, dtype=np.int64)

if JIT_ENABLED:
    @numba.njit(cache=True)
    def new_array_list(count):
        """``count`` empty int64 arrays, in a list kernels can mutate."""
        out = _TypedList()
        for _ in range(count):
            out.append(np.zeros(0, dtype=np.int64))
        return out
else:
    def new_array_list(count):
        return [EMPTY_I64] * count
