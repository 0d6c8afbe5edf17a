import pytest

from fittm.analysis import (
    certificate_valid, classify_cells, ev_to_writable_transform, first_looping_snapshot,
    loop_ordinal_writer,
)
from fittm.errors import NotCertifiedDivergent
from fittm.feedback import eval_feedback
from fittm.ordinal import OMEGA, decode_ordinal, parse_ordinal
from fittm.program import OUTPUT, SCRATCH
from fittm.store import load_corpus
from fittm.tape import TapeRep
from fittm.verdict import CONVERGES, DIVERGES, FREEZES, Budgets

B = Budgets()
DIVERGERS = ["idle_diverger", "right_sweeper", "par_seven", "par_never", "loop_caller",
             "two_change", "flip_loop", "slow_writer", "blinker", "two_phase"]


@pytest.fixture(scope="module")
def store():
    return load_corpus()


@pytest.mark.parametrize("name", DIVERGERS)
def test_certificate(store, name):
    cert = first_looping_snapshot(store, store.id_of(name), B)
    assert certificate_valid(store, cert, B)
    cc = classify_cells(cert)
    assert cc.tags == cc.direct
    assert decode_ordinal(cert.stage_order) == cert.length


def test_loop_lengths(store):
    assert first_looping_snapshot(store, store.id_of("idle_diverger"), B).length == OMEGA
    cert = first_looping_snapshot(store, store.id_of("two_phase"), B)
    assert cert.length == parse_ordinal("w*2")
    assert cert.entry.clock == parse_ordinal("w*2")
    assert decode_ordinal(loop_ordinal_writer(store, store.id_of("blinker"), B)) == parse_ordinal("w*2")


def test_cell_classes(store):
    cc = classify_cells(first_looping_snapshot(store, store.id_of("flip_loop"), B))
    assert cc.cofinal() == [(SCRATCH, 0)]
    cc = classify_cells(first_looping_snapshot(store, store.id_of("two_change"), B))
    assert cc.bounded() and not cc.cofinal()
    # bounded cells change an even number of times per loop, so parity agrees too
    assert all(cc.counts[c] % 2 == 0 and cc.parity[c] == 0 for c in cc.bounded())


def test_not_divergent(store):
    with pytest.raises(NotCertifiedDivergent):
        first_looping_snapshot(store, store.id_of("halt_writer"), B)
    with pytest.raises(NotCertifiedDivergent):
        first_looping_snapshot(store, store.id_of("self_call"), B)


@pytest.mark.parametrize("name,kind,output", [
    ("idle_diverger", CONVERGES, "1"),
    ("slow_writer", CONVERGES, "11"),
    ("halt_writer", CONVERGES, "101"),
    ("blinker", DIVERGES, None),
    ("self_call", FREEZES, None),
])
def test_transform(store, name, kind, output):
    t = ev_to_writable_transform(store, store.id_of(name))
    v = eval_feedback(store, t, budgets=B)[0]
    assert v.kind == kind
    if output is not None:
        assert v.output == TapeRep.from_bits(output)


def test_transform_matches_eventual_output(store):
    # for a diverger whose output settles, the transform halts with that output
    v = eval_feedback(store, store.id_of("slow_writer"), budgets=B)[0]
    t = ev_to_writable_transform(store, store.id_of("slow_writer"))
    w = eval_feedback(store, t, budgets=B)[0]
    assert v.final.tapes[OUTPUT] == w.output
