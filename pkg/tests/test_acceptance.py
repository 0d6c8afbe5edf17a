"""Acceptance suite: one PASS/FAIL line per criterion.

Run ``python3 tests/test_acceptance.py`` for the summary, or through pytest
(``pytest -s tests/test_acceptance.py`` shows the lines).
"""

from __future__ import annotations

import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import DenseRun, exact_period, limsup_window  # noqa: E402

from fittm.analysis import certificate_valid, classify_cells, first_looping_snapshot  # noqa: E402
from fittm.errors import OrdinalViolation  # noqa: E402
from fittm.feedback import Evaluator, eval_feedback, replay_witness, tree_dot  # noqa: E402
from fittm.fixpoint import OraclePair, apply_operator, call_closure, lfp  # noqa: E402
from fittm.ordinal import (  # noqa: E402
    OMEGA, ZERO, Ordinal, decode_ordinal, encode_ordinal, ord_add, ord_cmp, parse_ordinal,
)
from fittm.program import NTAPES, OUTPUT, encode_ordinal_tape  # noqa: E402
from fittm.store import corpus_dir, load_corpus, load_universe  # noqa: E402
from fittm.synth import Builder, index_cells, merge_cells, query  # noqa: E402
from fittm.tape import BLANK  # noqa: E402
from fittm.variants import (  # noqa: E402
    TIERS, build_flip_program, ordinal_oracle_run, parallel_call,
)
from fittm.verdict import CONVERGES, DIVERGES, FREEZES, UNKNOWN, Budgets  # noqa: E402

B = Budgets()
RESULTS: dict[int, tuple[bool, str]] = {}


def report(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


@pytest.fixture(scope="module")
def store():
    return load_corpus()


def root_verdicts(store, budgets=B):
    out = {}
    for p in store:
        ev = Evaluator(store, budgets, record=True)
        out[p.pid] = (ev.root(p.pid), ev)
    return out


def random_ordinal(rng: random.Random, max_exp: int = 4, max_coeff: int = 4) -> Ordinal:
    terms = []
    for exp in sorted(rng.sample(range(max_exp), rng.randint(0, max_exp)), reverse=True):
        c = rng.randint(1, max_coeff)
        terms.append({0: str(c), 1: f"w*{c}"}.get(exp, f"w^{exp}*{c}"))
    return parse_ordinal("+".join(terms) or "0")


# 1


def test_naive_stepper(store):
    t0 = time.perf_counter()
    checked, bad = 0, []
    for p in store:
        v, ev = root_verdicts_one(store, p.pid)
        if v.kind != CONVERGES or len(ev.tree) > 1 or ord_cmp(v.clock, OMEGA) >= 0:
            continue
        run = DenseRun(p, BLANK)
        halted = run.run(10 ** 5)
        same = (halted and ord_cmp(v.clock, Ordinal.of(run.steps)) == 0
                and run.tapes[OUTPUT].to_rep() == v.output
                and all(run.tapes[r].to_rep() == v.final.tapes[r] for r in range(NTAPES)))
        checked += 1
        if not same:
            bad.append(p.name)
    elapsed = time.perf_counter() - t0
    ok = checked >= 20 and not bad and elapsed < 10
    report(1, ok, f"{checked} halting programs match the dense stepper, mismatches {bad}, {elapsed:.2f}s")
    assert ok


def root_verdicts_one(store, e, budgets=B):
    ev = Evaluator(store, budgets, record=True)
    return ev.root(e), ev


# 2


def test_limit_rule(store):
    steps, window = 4000, 64
    answers = Evaluator(store, B)

    def oracle(call):
        return answers.evaluate(call).kind

    checked, bad = 0, []
    for p in store:
        v, ev = root_verdicts_one(store, p.pid)
        if v.kind != DIVERGES:
            continue
        events = [x for x in ev.runners[0].events if x[0] in ("limit", "macro")]
        lim = events[0][2]
        period = exact_period(p, BLANK, steps, oracle)
        half, quarter = limsup_window(p, BLANK, steps, window, oracle)
        settled = half == quarter and (period is None or 3 * period <= steps // 2)
        cells = all(lim.tapes[r].read(i) == half[r][i] for r in range(NTAPES) for i in range(window))
        inside = all(lim.tapes[r].extent <= window for r in range(NTAPES))
        good = (lim.state == "limit" and lim.head == 0 and ord_cmp(lim.clock, OMEGA) == 0
                and settled and cells and inside)
        checked += 1
        if not good:
            bad.append(p.name)
    ok = checked > 0 and not bad
    report(2, ok, f"{checked} divergers: first limit is (limit, 0, w) with brute lim-sup cells; mismatches {bad}")
    assert ok


# 3


def test_flip_escape(store):
    v, ev = root_verdicts_one(store, store.id_of("flip_escape"))
    limits = [x for x in ev.runners[0].events if x[0] == "limit"]
    first_repeat_not_final = bool(limits) and not limits[0][2].same_config(limits[0][1].base)
    ok = v.kind == CONVERGES and ord_cmp(v.clock, OMEGA) > 0 and first_repeat_not_final
    report(3, ok, f"flip_escape: {v.kind} at clock {v.clock}, repeat at stage 2 not taken as divergence")
    assert ok


# 4


def test_freezing(store):
    v, tree = eval_feedback(store, store.id_of("self_call"), budgets=B)
    replayed = v.kind == FREEZES and replay_witness(store, v.witness, B)
    dot = tree_dot(tree)
    chain = all(len(n.children) <= 1 for n in tree.nodes) and "rank=same" not in dot
    edges = dot.count("->")
    ok = replayed and chain and edges == len(tree) - 1 and len(tree) >= 2
    report(4, ok, f"self_call {v.kind}, witness replayed={replayed}, DOT chain of {len(tree)} nodes")
    assert ok


# 5


def test_flip_truth_table(store):
    cls = {}

    def verdict(e):
        if e not in cls:
            cls[e] = eval_feedback(store, e, budgets=B)[0].kind
        return cls[e]

    table = {}
    for name, want in (("halt_writer", DIVERGES), ("idle_diverger", CONVERGES), ("self_call", FREEZES)):
        got = verdict(build_flip_program(store, store.id_of(name)))
        table[name] = got
        assert got == want, (name, got)
    base = [p.pid for p in store if p.pid < 1000]
    bad, decided = [], 0
    for e in base:
        k = verdict(e)
        if k == UNKNOWN:
            continue
        decided += 1
        ff = build_flip_program(store, build_flip_program(store, e))
        if verdict(ff) != k:
            bad.append(store.get(e).name)
    ok = not bad
    report(5, ok, f"flip table {table}; double flip kept the class on {decided} programs, broken {bad}")
    assert ok


# 6


def _caller(beta: Ordinal, target: int, name: str) -> Builder:
    b = Builder(name, ["index", "ordinal"])
    cells = merge_cells(index_cells(target), [{"ordinal": v} for v in encode_ordinal_tape(beta)])
    b.write_cells("start", cells, query("halt", "halt"))
    return b


def test_ordinal_discipline(store):
    rng = random.Random(6)
    targets = [store.id_of(n) for n in ("halt_writer", "idle_diverger", "ask_halter", "chain",
                                        "bad_ordinal", "child_queries")]
    callers = []
    for k in range(40):
        beta = random_ordinal(rng, 3, 3)
        t = rng.choice(targets)
        callers.append((store.add(_caller(beta, t, f"caller_{k}").build()), beta))
    callers += [(store.id_of("chain"), None), (store.id_of("iitm_root"), None)]
    runs = frozen = accepted = violations = 0
    problems = []
    for _ in range(1000):
        e, beta = rng.choice(callers)
        alpha = random_ordinal(rng, 3, 3)
        runs += 1
        try:
            v, tree = ordinal_oracle_run(store, e, alpha, budgets=B)
        except OrdinalViolation as exc:
            violations += 1
            last = exc.tree.nodes[-1]
            parent = exc.tree.nodes[last.parent]
            if last.alpha is not None and ord_cmp(last.alpha, parent.alpha) < 0:
                problems.append(("violation without beta >= alpha", e, str(alpha)))
            continue
        except AssertionError:
            frozen += 1
            continue
        if v.kind == FREEZES:
            frozen += 1
        if beta is not None and ord_cmp(beta, alpha) >= 0:
            problems.append(("beta >= alpha accepted", e, str(alpha)))
        accepted += 1
        for n in tree.nodes[1:]:
            if n.clock is None and n.status == "active":
                continue
            if not ord_cmp(n.alpha, tree.nodes[n.parent].alpha) < 0:
                problems.append(("non-decreasing path", e, str(alpha)))
    ok = frozen == 0 and not problems and runs == 1000
    report(6, ok, f"{runs} runs: {accepted} accepted with decreasing ordinals, "
                  f"{violations} OrdinalViolation, {frozen} freezes, problems {problems[:3]}")
    assert ok


# 7


def test_parallel(store):
    got = {n: str(parallel_call(store, store.id_of(n), budgets=B))
           for n in ("par_seven", "par_freeze", "par_never")}
    table = got == {"par_seven": "yes(7)", "par_freeze": "freezes(0)", "par_never": "no(budget_relative)"}
    ladder = [Budgets(max_parallel=m, max_steps_per_block=s)
              for m, s in ((8, 500), (12, 5000), (16, 20000), (24, 100000))]
    stable = True
    for n in ("par_seven", "par_freeze", "par_never"):
        seen_yes = False
        for b in ladder:
            kind = parallel_call(store, store.id_of(n), budgets=b).kind
            if seen_yes and kind != "yes":
                stable = False
            seen_yes |= kind == "yes"
    ok = table and stable
    report(7, ok, f"parallel table {got}; yes stable up the ladder={stable}")
    assert ok


# 8


def test_lfp_agreement(store):
    t0 = time.perf_counter()
    rows, bad, sizes = 0, [], []
    fixed = {}
    for path in sorted(corpus_dir().glob("universe_*.txt")):
        calls = call_closure(store, load_universe(path, store).values(), B, cap=20)
        closed = call_closure(store, calls, B, cap=21) == calls
        pair, iters = lfp(calls, store, B)
        fixed[path.name] = (calls, pair)
        sizes.append(len(calls))
        if not closed or len(calls) > 20 or iters > len(calls) + 1:
            bad.append((path.name, closed, iters))
        for c in calls:
            k = Evaluator(store, B).evaluate(c).kind
            want = {CONVERGES: "down", DIVERGES: "up"}.get(k, "undecided")
            rows += 1
            if pair.status(c) != want:
                bad.append((path.name, c.label(), pair.status(c), k))
    rng = random.Random(8)
    mono = 0
    calls, top = fixed["universe_mixed.txt"]
    for _ in range(100):
        qd = {c for c in top.down if rng.random() < 0.6}
        qu = {c for c in top.up if rng.random() < 0.6}
        q = OraclePair(qd, qu)
        p = OraclePair({c for c in qd if rng.random() < 0.5}, {c for c in qu if rng.random() < 0.5})
        if apply_operator(p, calls, store, B) <= apply_operator(q, calls, store, B):
            mono += 1
    elapsed = time.perf_counter() - t0
    ok = not bad and mono == 100 and elapsed < 60
    report(8, ok, f"{rows} calls over universes of sizes {sizes} agree with direct evaluation; "
                  f"monotone {mono}/100; {elapsed:.1f}s; problems {bad[:3]}")
    assert ok


# 9


def test_ordinal_laws():
    rng = random.Random(9)
    fails = 0
    for _ in range(1000):
        a, b, c = (random_ordinal(rng) for _ in range(3))
        n = Ordinal.of(rng.randint(0, 50))
        if ord_add(ord_add(a, b), c) != ord_add(a, ord_add(b, c)):
            fails += 1
        if ord_cmp(b, c) != 0:
            lo, hi = (b, c) if ord_cmp(b, c) < 0 else (c, b)
            if not ord_cmp(ord_add(a, lo), ord_add(a, hi)) < 0:
                fails += 1
        if ord_add(n, OMEGA) != OMEGA:
            fails += 1
        if decode_ordinal(encode_ordinal(a)) != a:
            fails += 1
    ok = fails == 0
    report(9, ok, f"associativity, right strict monotonicity, n+w=w, decode.encode on 1000 samples: {fails} failures")
    assert ok


# 10


def test_analysis_pipeline(store):
    bad, names = [], []
    for p in list(store):
        if p.pid >= 1000:
            continue
        v, _ = root_verdicts_one(store, p.pid)
        if v.kind != DIVERGES:
            continue
        names.append(p.name)
        cert = first_looping_snapshot(store, p.pid, B)
        cc = classify_cells(cert)
        order = decode_ordinal(cert.stage_order)
        if not certificate_valid(store, cert, B):
            bad.append((p.name, "certificate"))
        if cc.tags != cc.direct:
            bad.append((p.name, "classification"))
        if any((cc.counts[c] is None) != (t == "cofinal") for c, t in cc.tags.items()):
            bad.append((p.name, "counts"))
        if order != cert.length:
            bad.append((p.name, "order type", str(order), str(cert.length)))
    ok = bool(names) and not bad
    report(10, ok, f"{len(names)} divergers: certificates re-enter, tags match counting, "
                   f"writer order type equals loop length; problems {bad}")
    assert ok


# 11


def test_budget_ladder(store):
    base = [p.pid for p in store if p.pid < 1000]
    prev = {}
    changed, promoted = [], 0
    for f in TIERS:
        b = B.scaled(f)
        for e in base:
            v = eval_feedback(store, e, budgets=b)[0]
            key = (v.kind, v.output if v.kind == CONVERGES else None)
            old = prev.get(e)
            if old is not None and old[0] != UNKNOWN and old != key:
                changed.append(store.get(e).name)
            if old is not None and old[0] == UNKNOWN and v.kind != UNKNOWN:
                promoted += 1
            prev[e] = key
    ok = not changed
    report(11, ok, f"{len(base)} programs over tiers {TIERS}: {promoted} Unknown->decided, decided changes {changed}")
    assert ok


def main() -> int:
    tests = [test_naive_stepper, test_limit_rule, test_flip_escape, test_freezing,
             test_flip_truth_table, test_ordinal_discipline, test_parallel, test_lfp_agreement,
             test_ordinal_laws, test_analysis_pipeline, test_budget_ladder]
    for n, t in enumerate(tests, 1):
        try:
            if "store" in t.__code__.co_varnames[:t.__code__.co_argcount]:
                t(load_corpus())
            else:
                t()
        except AssertionError:
            pass
        except Exception as exc:  # a crash is a failure of that criterion
            report(n, False, f"{type(exc).__name__}: {exc}")
    return 0 if all(ok for ok, _ in RESULTS.values()) and len(RESULTS) == len(tests) else 1


if __name__ == "__main__":
    sys.exit(main())
