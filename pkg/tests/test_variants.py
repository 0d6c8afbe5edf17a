import pytest

from fittm.errors import DepthViolation, OrdinalViolation
from fittm.feedback import eval_feedback
from fittm.ordinal import OMEGA, Ordinal, ord_cmp, parse_ordinal
from fittm.store import load_corpus
from fittm.tape import TapeRep
from fittm.variants import (
    build_flip_program, dovetail, iitm_run, ordinal_oracle_run, parallel_call, strong_jump,
)
from fittm.verdict import CONVERGES, DIVERGES, Budgets

B = Budgets()


@pytest.fixture(scope="module")
def store():
    return load_corpus()


def test_strong_jump(store):
    assert strong_jump(store, 0, budgets=B).answer == "in"
    assert strong_jump(store, 1, budgets=B).answer == "out"
    assert strong_jump(store, store.id_of("ask_halter"), budgets=B).answer == "in"
    with pytest.raises(DepthViolation) as info:
        strong_jump(store, store.id_of("child_queries"), budgets=B)
    assert len(info.value.tree) == 3


def test_ordinal_chain(store):
    v, tree = ordinal_oracle_run(store, store.id_of("chain"), OMEGA, budgets=B)
    assert v.kind == CONVERGES
    alphas = [n.alpha for n in tree.nodes]
    assert alphas == [OMEGA] + [Ordinal.of(k) for k in (3, 2, 1, 0)]
    assert all(ord_cmp(a, b) > 0 for a, b in zip(alphas, alphas[1:]))


def test_ordinal_violation(store):
    with pytest.raises(OrdinalViolation):
        ordinal_oracle_run(store, store.id_of("bad_ordinal"), Ordinal.of(1), budgets=B)
    v, _ = ordinal_oracle_run(store, store.id_of("bad_ordinal"), Ordinal.of(2), budgets=B)
    assert v.kind == CONVERGES


def test_iitm(store):
    v, tree = iitm_run(store, store.id_of("iitm_root"), budgets=B)
    assert v.kind == CONVERGES
    assert tree.nodes[1].alpha == parse_ordinal("w*2")


def test_dovetail_order():
    pairs = list(dovetail(3, 3))
    assert pairs[:4] == [(0, 0), (1, 0), (0, 1), (2, 0)]
    assert sorted(pairs) == [(n, t) for n in range(3) for t in range(3)]


@pytest.mark.parametrize("name,want", [
    ("par_seven", "yes(7)"), ("par_freeze", "freezes(0)"), ("par_never", "no(budget_relative)"),
])
def test_parallel(store, name, want):
    assert str(parallel_call(store, store.id_of(name), budgets=B)) == want


def test_parallel_small_budget(store):
    assert parallel_call(store, store.id_of("par_seven"), budgets=Budgets(max_parallel=4)).kind == "no"


def test_flip(store):
    f = build_flip_program(store, store.id_of("halt_writer"))
    assert eval_feedback(store, f, budgets=B)[0].kind == DIVERGES
    v = eval_feedback(store, f, TapeRep.from_bits("1"), budgets=B)[0]
    assert v.kind == DIVERGES
