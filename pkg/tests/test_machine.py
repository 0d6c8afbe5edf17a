import random
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from oracles import DenseRun  # noqa: E402

from fittm.asm import parse_program  # noqa: E402
from fittm.errors import CapExceeded, UndecodableOracleTape  # noqa: E402
from fittm.machine import Runner, decode_call, run, run_block, step  # noqa: E402
from fittm.ordinal import OMEGA, Ordinal, ord_cmp, parse_ordinal  # noqa: E402
from fittm.program import (  # noqa: E402
    HALT, NTAPES, ORDINAL, OUTPUT, Snapshot, decode_natural, decode_ordinal_tape, encode_natural,
    encode_ordinal_tape, initial_snapshot,
)
from fittm.store import load_corpus  # noqa: E402
from fittm.tape import BLANK, TapeRep  # noqa: E402
from fittm.verdict import CONVERGES, DIVERGES, STEP_BUDGET, UNKNOWN, Budgets  # noqa: E402

B = Budgets()


def random_program(seed: int, n_states: int = 3):
    rng = random.Random(seed)
    states = ["start"] + [f"s{i}" for i in range(1, n_states)]
    targets = states + ["halt"] * 1
    lines = ["@tapes scratch output"]
    for s in states + ["limit"]:
        for read in ("00", "01", "10", "11"):
            write = "".join(rng.choice("01*") for _ in range(2))
            nxt = rng.choice(targets + (["limit"] if s == "limit" else []))
            lines.append(f"{s} {read} -> {write} {rng.choice('LSR')} {nxt}")
    return parse_program("\n".join(lines) + "\n", f"r{seed}")


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_symbolic_matches_dense(seed):
    p = random_program(seed)
    v = run(p, BLANK, Budgets(max_steps_per_block=2000, max_limit_stages=16))
    dense = DenseRun(p, BLANK)
    halted = dense.run(3000)
    if v.kind == CONVERGES and ord_cmp(v.clock, OMEGA) < 0:
        assert halted and v.clock == Ordinal.of(dense.steps)
        assert all(dense.tapes[r].to_rep() == v.final.tapes[r] for r in range(NTAPES))
    elif v.kind in (CONVERGES, DIVERGES):
        # a verdict reached at or past omega means no halt at any finite stage
        assert not halted
    if halted:
        assert v.kind == CONVERGES


@pytest.mark.parametrize("n", [0, 1, 2, 7, 255, 1024])
def test_natural_coding(n):
    assert decode_natural(TapeRep.from_bits(encode_natural(n))) == n


@pytest.mark.parametrize("text", ["0", "1", "w", "w*2+3", "w^2*3+w+1", "w^w+w^3"])
def test_ordinal_tape_coding(text):
    a = parse_ordinal(text)
    assert decode_ordinal_tape(TapeRep.from_bits(encode_ordinal_tape(a))) == a


def test_bad_ordinal_tape():
    ones = TapeRep.from_bits("1", tail=1)
    with pytest.raises(CapExceeded):
        decode_ordinal_tape(ones)
    tapes = [BLANK] * NTAPES
    tapes[ORDINAL] = ones
    with pytest.raises(UndecodableOracleTape):
        decode_call(tuple(tapes), with_ordinal=True)


def test_step_and_halt():
    store = load_corpus()
    p = store.by_name("halt_writer")
    s = initial_snapshot()
    for _ in range(2):
        s = step(s, p)
        assert isinstance(s, Snapshot)
    done = step(s, p)
    assert done.snapshot.state == HALT
    assert done.snapshot.tapes[OUTPUT] == TapeRep.from_bits("101")


def test_block_cycle_and_limit():
    store = load_corpus()
    p = store.by_name("idle_diverger")
    out = run_block(initial_snapshot(), p, 100)
    assert out.kind == "cycle" and out.cycle.period == 1
    v = run(p, BLANK, B)
    assert v.kind == DIVERGES and v.clock == parse_ordinal("w*2")
    assert v.final.state == "limit" and v.final.head == 0


def test_translated_cycle():
    store = load_corpus()
    v = run(store.by_name("right_sweeper"), BLANK, B)
    assert v.kind == DIVERGES


def test_step_budget():
    store = load_corpus()
    v = run(store.by_name("counter_12"), BLANK, Budgets(max_steps_per_block=100))
    assert v.kind == UNKNOWN and v.reason == STEP_BUDGET


def test_query_without_oracle():
    store = load_corpus()
    with pytest.raises(UndecodableOracleTape):
        Runner(store.by_name("ask_halter"), initial_snapshot(), B).run()


def test_runner_records_events():
    store = load_corpus()
    r = Runner(store.by_name("flip_escape"), initial_snapshot(), B, record=True)
    v = r.run()
    assert v.kind == CONVERGES and v.clock == parse_ordinal("w+1")
    assert [e[0] for e in r.events][:2] == ["block", "limit"]
