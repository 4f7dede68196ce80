import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpair.errors import AlphabetError, CapacityError, PositionError
from rpair.text import SkippableText


def test_load_is_identity():
    t = SkippableText.from_bytes(b"abc")
    assert list(t.extract_final_text()) == [97, 98, 99]
    assert not any(t.is_blank(i) for i in range(3))


def test_empty_input_rejected():
    with pytest.raises(CapacityError):
        SkippableText.from_bytes(b"")


def test_symbols_outside_alphabet_rejected():
    with pytest.raises(AlphabetError):
        SkippableText.from_bytes([0, 5, 300], sigma=256)


def test_structure_size_per_symbol():
    n = 1 << 16
    t = SkippableText.from_bytes(bytes(n))
    # 16-bit cells, one occupancy bit, two int32 counters per 32-position block
    assert t.nbytes() <= 2 * n + n // 8 + 2 * 4 * (n // 32 + 2) + 8


def test_pair_starting_at():
    t = SkippableText.from_bytes(b"abab")
    assert t.pair_starting_at(1) == (98, 97)
    assert SkippableText.from_bytes(b"ab").pair_starting_at(1) is None


def test_pair_skips_blank_after_wide_symbol():
    t = SkippableText.from_bytes(b"abbc")
    t.replace_pair_at(1, 70000)
    assert t.is_blank(2)
    assert t.pair_starting_at(1) == (70000, 99)
    assert t.pair_starting_at(0) == (97, 70000)


def test_replace_then_read():
    t = SkippableText.from_bytes(b"abab")
    t.replace_pair_at(0, 256)
    assert t.is_blank(1)
    assert t.pair_starting_at(0) == (256, 97)
    assert list(t.extract_final_text()) == [256, 97, 98]


def test_chain_replace_aaaa():
    t = SkippableText.from_bytes(b"aaaa")
    t.replace_pair_at(0, 256)
    t.replace_pair_at(2, 256)
    assert t.next_nonblank(1) == 2
    assert list(t.extract_final_text()) == [256, 256]


def test_long_run_recorded_at_both_ends():
    n = 64
    t = SkippableText.from_bytes(bytes(range(n)))
    x = 256
    # grow the blank run after position 3 one symbol at a time
    for _ in range(40):
        t.replace_pair_at(3, x)
        x += 1
    assert t.next_nonblank(3) == 44
    assert t.prev_nonblank(44) == 3
    cells, occ, rstart, rend = t.T
    assert rstart[4 >> 5] == 40
    assert rend[43 >> 5] == 40


def test_run_over_1_to_100():
    t = SkippableText.from_bytes(bytes(102))
    for _ in range(100):
        t.replace_pair_at(0, 300)
    assert t.next_nonblank(0) == 101
    assert t.prev_nonblank(101) == 0


def test_boundaries():
    t = SkippableText.from_bytes(b"abcd")
    assert t.next_nonblank(0) == 1
    assert t.next_nonblank(3) is None
    assert t.prev_nonblank(0) is None


def test_position_errors():
    t = SkippableText.from_bytes(b"abc")
    t.replace_pair_at(0, 256)
    with pytest.raises(PositionError):
        t.symbol(1)
    with pytest.raises(PositionError):
        t.pair_starting_at(1)
    with pytest.raises(PositionError):
        t.replace_pair_at(2, 257)
    with pytest.raises(PositionError):
        t.next_nonblank(3)


class Model:
    """List model of the text; None marks a blank."""

    def __init__(self, data):
        self.s = list(data)

    def live(self):
        return [i for i, c in enumerate(self.s) if c is not None]

    def replace(self, i, x):
        j = next(k for k in range(i + 1, len(self.s)) if self.s[k] is not None)
        self.s[i] = x
        self.s[j] = None


def _random_session(rng, n, steps):
    data = bytes(rng.randrange(4) for _ in range(n))
    t = SkippableText.from_bytes(data)
    m = Model(data)
    x = 256
    for _ in range(steps):
        live = m.live()
        if len(live) < 2:
            break
        i = rng.choice(live[:-1])
        big = rng.random() < 0.3
        sym = x + (rng.randrange(1 << 20) if big else 0)
        t.replace_pair_at(i, sym)
        m.replace(i, sym)
        x += 1
    return t, m


@pytest.mark.parametrize("seed", range(40))
def test_matches_list_model(seed):
    rng = random.Random(seed)
    n = rng.choice([5, 33, 64, 100, 300])
    t, m = _random_session(rng, n, rng.randrange(n))
    live = m.live()
    assert list(t.extract_final_text()) == [m.s[i] for i in live]
    for i in range(n):
        assert t.is_blank(i) == (m.s[i] is None)
        nxt = next((k for k in live if k > i), None)
        prv = next((k for k in reversed(live) if k < i), None)
        assert t.next_nonblank(i) == nxt
        assert t.prev_nonblank(i) == prv


@given(st.binary(min_size=1, max_size=200))
def test_extract_roundtrip(data):
    assert bytes(SkippableText.from_bytes(data).extract_final_text().astype(np.uint8)) == data


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(2, 400))
def test_prev_next_inverse(seed, n):
    t, m = _random_session(random.Random(seed), n, n // 2)
    before = len(m.live())
    live = m.live()
    for i in live:
        j = t.next_nonblank(i)
        if j is not None:
            assert t.prev_nonblank(j) == i
    assert len(t.extract_final_text()) == before
