"""Synthetic inputs for tests and benchmarks."""
import numpy as np

_WORDS = (
    "the of and to in is was that for on with as by at from his her they which be this are had not "
    "but or have one all were we when there can an more their if has been would who will so no out "
    "time about into them up some could other than then its only these two may first any new like "
    "people made over did after most years between many where world those should such well state "
    "through under city during three being year without before same number another while while each "
    "river house small found still large part place water music church school history family north "
    "called second general system public against important national several company government"
).split()


def fibonacci_word(n, a=b"a", b=b"b"):
    """First ``n`` bytes of the Fibonacci word."""
    x, y = a, a + b
    while len(y) < n:
        x, y = y, y + x
    return y[:n]


def thue_morse(n, a=ord("a"), b=ord("b")):
    i = np.arange(n, dtype=np.uint64)
    bits = np.zeros(n, dtype=np.uint8)
    while i.any():
        bits ^= (i & 1).astype(np.uint8)
        i >>= 1
    return np.where(bits == 1, b, a).astype(np.uint8).tobytes()


def english_like(n, seed=0):
    """Zipf-distributed words with light punctuation, ``n`` bytes."""
    rng = np.random.default_rng(seed)
    ranks = np.arange(1, len(_WORDS) + 1)
    p = 1.0 / ranks
    p /= p.sum()
    out = bytearray()
    while len(out) < n:
        idx = rng.choice(len(_WORDS), size=4096, p=p)
        stops = rng.random(4096)
        for w, r in zip(idx, stops):
            out += _WORDS[w].encode()
            out += b". " if r < 0.06 else (b", " if r < 0.12 else b" ")
    return bytes(out[:n])


def duplicated_documents(n, doc_size=20_000, edit_rate=0.002, seed=0):
    """Versions of one document, each a lightly edited copy of the previous."""
    rng = np.random.default_rng(seed)
    doc = bytearray(english_like(doc_size, seed))
    out = bytearray()
    while len(out) < n:
        out += doc
        for _ in range(max(1, int(len(doc) * edit_rate))):
            pos = int(rng.integers(len(doc)))
            op = rng.integers(3)
            if op == 0:
                doc[pos] = int(rng.integers(97, 123))
            elif op == 1:
                doc.insert(pos, int(rng.integers(97, 123)))
            elif len(doc) > 1:
                del doc[pos]
    return bytes(out[:n])


def random_bytes(n, seed=0, alphabet=256):
    rng = np.random.default_rng(seed)
    return rng.integers(0, alphabet, size=n, dtype=np.uint8).tobytes()
