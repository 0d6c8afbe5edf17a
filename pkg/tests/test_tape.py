import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fittm.tape import BLANK, TapeRep, format_tape, parse_tape, tape_read, tape_shift_equal, tape_write

writes = st.lists(st.tuples(st.integers(0, 40), st.integers(0, 1)), max_size=30)
tapes = st.builds(lambda bits, tail: TapeRep.from_bits(bits, tail),
                  st.lists(st.integers(0, 1), max_size=30), st.integers(0, 1))


def apply(t, ws):
    for i, b in ws:
        t = tape_write(t, i, b)
    return t


def as_function(ws, tail=0, n=60):
    cells = {}
    for i, b in ws:
        cells[i] = b
    return [cells.get(i, tail) for i in range(n)]


def test_examples():
    t = TapeRep.from_bits("0110")
    assert format_tape(t) == "0^1 1^2 | tail 0"
    assert tape_read(t, 2) == 1 and tape_read(t, 100) == 0
    assert tape_write(t, 0, 0) == t
    assert format_tape(BLANK) == "| tail 0"
    assert TapeRep.from_bits("0011", tail=1) == TapeRep.from_bits("00", tail=1)


@settings(max_examples=300, deadline=None)
@given(writes, st.integers(0, 1))
def test_write_read_agrees_with_dict(ws, tail):
    t = apply(TapeRep((), tail), ws)
    assert [tape_read(t, i) for i in range(60)] == as_function(ws, tail)


@settings(max_examples=300, deadline=None)
@given(writes, st.randoms(use_true_random=False))
def test_normal_form_unique(ws, rnd):
    # writes to distinct cells commute; keep the last write per cell then shuffle
    last = dict(ws)
    items = list(last.items())
    rnd.shuffle(items)
    assert apply(BLANK, ws) == apply(BLANK, items)


@settings(max_examples=300, deadline=None)
@given(tapes)
def test_format_round_trip(t):
    assert parse_tape(format_tape(t)) == t


@settings(max_examples=200, deadline=None)
@given(tapes, st.integers(0, 10), st.integers(0, 10))
def test_shift_equal_self(t, h, k):
    shifted = TapeRep.from_bits([0] * k + t.bits(t.extent), t.tail)
    assert tape_shift_equal(t, h, shifted, h + k, behind=h) == k


def test_shift_equal_mismatch():
    a = TapeRep.from_bits("101")
    b = TapeRep.from_bits("111")
    assert tape_shift_equal(a, 0, b, 0) is None
    assert tape_shift_equal(a, 2, b, 2, behind=0) == 0


@pytest.mark.parametrize("bad", ["012", "1^x | tail 0", "1^2 | tail 2", "1^2 | 0"])
def test_parse_errors(bad):
    with pytest.raises(ValueError):
        parse_tape(bad)
