import json

import pytest

from fittm.feedback import (
    Evaluator, eval_feedback, export_tree, node_limit_extrapolate, replay_witness, tree_dot,
)
from fittm.machine import Checkpoint
from fittm.program import OracleCall
from fittm.store import load_corpus
from fittm.tape import BLANK
from fittm.verdict import CONVERGES, DEPTH_BUDGET, DIVERGES, FREEZES, UNKNOWN, Budgets

B = Budgets()


@pytest.fixture(scope="module")
def store():
    return load_corpus()


def kind(store, name, **kw):
    return eval_feedback(store, store.id_of(name), budgets=B, **kw)[0].kind


@pytest.mark.parametrize("name,want", [
    ("halt_writer", CONVERGES), ("idle_diverger", DIVERGES), ("self_call", FREEZES),
    ("ask_halter", CONVERGES), ("ask_idle", CONVERGES), ("child_queries", CONVERGES),
    ("loop_caller", DIVERGES), ("counter_caller", CONVERGES), ("par_freeze", FREEZES),
    ("two_phase", DIVERGES), ("flip_loop", DIVERGES),
])
def test_feedback_verdicts(store, name, want):
    assert kind(store, name) == want


def test_answers_steer(store):
    v, tree = eval_feedback(store, store.id_of("ask_idle"), budgets=B)
    assert v.output.read(0) == 1
    assert [n.status for n in tree.nodes] == ["converged", "diverged"]


def test_freeze_witness(store):
    v, tree = eval_feedback(store, store.id_of("self_call"), budgets=B)
    assert v.witness[0] == v.witness[-1]
    assert replay_witness(store, v.witness, B)
    assert not replay_witness(store, (OracleCall(0, BLANK),), B)


def test_depth_budget(store):
    # child_queries -> ask_halter -> halt_writer needs depth 2
    v, _ = eval_feedback(store, store.id_of("child_queries"), budgets=Budgets(max_depth=1))
    assert v.kind == UNKNOWN and v.reason == DEPTH_BUDGET


def test_cache_reuses_verdicts(store):
    ev = Evaluator(store, B)
    a = ev.evaluate(OracleCall(store.id_of("ask_halter"), BLANK))
    b = ev.evaluate(OracleCall(store.id_of("ask_halter"), BLANK))
    assert a.kind == b.kind == CONVERGES
    assert OracleCall(0, BLANK) in ev.cache


def test_export_is_deterministic(store):
    recs = []
    for _ in range(2):
        v, tree = eval_feedback(store, store.id_of("child_queries"), budgets=B)
        recs.append(json.dumps(export_tree(tree, v, B)))
    assert recs[0] == recs[1]
    rec = json.loads(recs[0])
    assert list(rec) == ["verdict", "clock", "budgets", "tree", "tapes", "widths"]
    assert rec["widths"] == [1, 1, 1]
    assert [n["parent"] for n in rec["tree"]] == [None, 0, 1]


def test_dot_siblings(store):
    _, tree = eval_feedback(store, store.id_of("counter_caller"), budgets=B)
    dot = tree_dot(tree)
    assert dot.startswith("digraph") and dot.count("->") >= len(tree) - 1


def test_node_limit_extrapolate(store):
    ev = Evaluator(store, B, record=True)
    v = ev.root(store.id_of("loop_caller"))
    assert v.kind == DIVERGES
    step = node_limit_extrapolate(ev.runners[0].checkpoints)
    assert step is not None and step.kind == "diverged"
    with pytest.raises(ValueError):
        node_limit_extrapolate([Checkpoint(v.final, v.final.tapes, "start")])
