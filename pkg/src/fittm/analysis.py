"""Loop certificates, bounded/cofinal cell classification, the loop-ordinal
writer and the eventually-writable to writable transform.

A certified loop runs from its entry snapshot to the limit stage where that
snapshot reappears.  It is modelled as a transient part followed by a final
repeating unit of finite length (a block cycle, or a stretch between two
equal checkpoints that contains no limit), so every stage of the loop is
``entry + offset`` with offsets below ``transient + omega``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import NotCertifiedDivergent
from .feedback import FEEDBACK, Evaluator, output_change_stop, start_snapshot
from .machine import Cycle, Runner, _apply
from .ordinal import ZERO, Ordinal, OrdinalCode, ord_add, ord_cmp, ord_sub, w_pow
from .program import DriverProgram, OracleCall, Program, Snapshot
from .store import ProgramStore
from .tape import BLANK, TapeRep
from .verdict import (
    CONVERGES, DIVERGES, LIMIT_BUDGET, Budgets, Verdict, converges, diverges, unknown,
)

Cell = tuple  # (tape role, cell index)

BOUNDED, COFINAL = "bounded", "cofinal"
DEFAULT_ROUNDS = 6


@dataclass
class FinalUnit:
    """The part of a loop that repeats omega times up to the reappearance.

    ``stages`` lists (state, head, tapes) for one unit, ``shift`` is the head
    displacement per unit (0 for exact repeats).
    """

    start: Ordinal  # offset from the entry
    period: int
    shift: int
    stages: list = field(repr=False)
    cycle: Optional[Cycle] = field(default=None, repr=False)
    program: Optional[Program] = field(default=None, repr=False)


@dataclass
class LoopCertificate:
    program: int
    input: TapeRep
    entry: Snapshot
    reappear: Ordinal
    kind: str
    length: Ordinal
    changes: list = field(repr=False)  # (offset, cell) in the transient, in order
    infinite: dict = field(repr=False)  # cell -> offset of the inner limit ending its changes
    final: FinalUnit = field(repr=False)
    stage_order: Optional[OrdinalCode] = field(default=None, repr=False)
    stage0: list = field(default_factory=list, repr=False)


def _changed_cells(before: tuple, after: tuple, head: int):
    for r, (a, b) in enumerate(zip(before, after)):
        if a is not b and a.read(head) != b.read(head):
            yield (r, head)


def _history_changes(history, start: int, stop: int, base: Ordinal):
    """Changes between consecutive recorded stages ``start..stop``."""
    states, heads, tapelist, _ = history
    out = []
    for i in range(start + 1, stop + 1):
        for cell in _changed_cells(tapelist[i - 1], tapelist[i], heads[i - 1]):
            out.append((ord_add(base, i - 1), cell))
    return out


def _translation_changes(c: Cycle, p: Program, base: Ordinal, window: int):
    """Step a translated cycle until its leftmost head passes ``window``.

    Only cells up to ``window`` are reported: their changes are complete,
    while cells further right may have been caught mid-sweep.
    """
    state, head, tapes = c.base.state, c.base.head, c.base.tapes
    out = []
    t = 0
    while True:
        low = head
        for _ in range(c.period):
            tr, nhead, ntapes, _ = _apply(p, state, head, tapes)
            for cell in _changed_cells(tapes, ntapes, head):
                out.append((ord_add(base, t), cell))
            state, head, tapes = tr.next, nhead, ntapes
            low = min(low, head)
            t += 1
        if low > window:
            return [(t, cell) for t, cell in out if cell[1] <= window]


def _window(snaps) -> int:
    return max(max(t.extent for t in s.tapes) for s in snaps) + max(s.head for s in snaps) + 8


def first_looping_snapshot(store: ProgramStore, e: int, budgets: Optional[Budgets] = None,
                           x: TapeRep = BLANK, rounds: int = DEFAULT_ROUNDS) -> LoopCertificate:
    """Certificate for the loop the run of ``e`` on ``x`` settles into.

    The entry is the snapshot whose repetition was certified with the
    guarantee condition (its limit is itself), not merely the first
    configuration seen twice.
    """
    b = budgets or Budgets()
    v = Evaluator(store, b, FEEDBACK).root(e, x)
    if v.kind != DIVERGES or v.loop is None:
        raise NotCertifiedDivergent(f"program {e} is not certified divergent: {v}")
    # re-running from the entry finds its first reappearance, which can come
    # before the stage where the main run certified the repetition
    cert = _model_loop(store, e, x, v.loop.entry, b)
    code, stage0 = _writer(cert, rounds)
    cert.stage_order, cert.stage0 = code, stage0
    return cert


def rerun_from(store: ProgramStore, e: int, x: TapeRep, entry: Snapshot, budgets: Budgets):
    ev = Evaluator(store, budgets, FEEDBACK, record=True)
    v = ev.evaluate(OracleCall(e, x, resume=entry))
    return v, ev.runners[0]


def certificate_valid(store: ProgramStore, cert: LoopCertificate,
                      budgets: Optional[Budgets] = None) -> bool:
    """Re-running from the entry returns to it at the reappearance stage."""
    v, _ = rerun_from(store, cert.program, cert.input, cert.entry, budgets or Budgets())
    return (v.kind == DIVERGES and v.loop is not None
            and v.loop.entry.same_config(cert.entry)
            and ord_cmp(v.loop.entry.clock, cert.entry.clock) == 0
            and ord_cmp(v.loop.reappear, cert.reappear) == 0
            and v.final is not None and v.final.same_config(cert.entry))


def _model_loop(store, e, x, entry: Snapshot, b: Budgets) -> LoopCertificate:
    v, runner = rerun_from(store, e, x, entry, b)
    if v.kind != DIVERGES or not v.loop.entry.same_config(entry):
        raise NotCertifiedDivergent("the loop does not restart at its entry")
    p = runner.program
    loop = v.loop
    blocks = [ev for ev in runner.events if ev[0] == "block"]
    newest = runner.checkpoints[-1].snapshot
    macro_final = loop.kind == "checkpoint" and not newest.clock.is_limit
    base = entry.clock

    def off(clock):
        return ord_sub(clock, base)

    changes: list = []
    infinite: dict = {}
    window = _window([entry] + [ev[1] for ev in blocks])

    if macro_final:
        # the whole stretch up to the repeated checkpoint recurs; it is oracle
        # free between calls and contains no limit
        if any(ev[0] == "limit" for ev in runner.events):
            raise NotCertifiedDivergent("repeating stretch with inner limits is not modelled")
        stages = []
        for _, snap, out in blocks:
            states, heads, tapelist, _ = out.history
            stages.extend(zip(states, heads, tapelist))
        # the answered call counts as one more stage with unchanged tapes
        period = int(off(newest.clock))
        stages = stages[:period]
        while len(stages) < period:
            stages.append(stages[-1])
        final = FinalUnit(ZERO, period, 0, stages, program=p)
        return LoopCertificate(e, x, entry, loop.reappear, loop.kind, loop.length,
                               changes, infinite, final)

    # every block but the last is transient; the last one ends in the final cycle
    for k, (_, snap, out) in enumerate(blocks):
        cyc = out.cycle
        n = len(out.history[0]) - 1
        if k < len(blocks) - 1:
            if cyc is None:
                raise NotCertifiedDivergent("calls inside a loop with limits are not modelled")
            t0 = n - cyc.period
            changes += _history_changes(out.history, 0, t0, off(snap.clock))
            lim_off = off(ord_add(cyc.base.clock, w_pow(1)))
            if cyc.shift == 0:
                inner = _history_changes(out.history, t0, n, off(cyc.base.clock))
                for _, cell in inner:
                    infinite[cell] = lim_off
            else:
                changes += _translation_changes(cyc, p, off(cyc.base.clock), window)
            continue
        t0 = n - cyc.period
        changes += _history_changes(out.history, 0, t0, off(snap.clock))
        states, heads, tapelist, _ = out.history
        stages = list(zip(states[t0:n], heads[t0:n], tapelist[t0:n]))
        final = FinalUnit(off(cyc.base.clock), cyc.period, cyc.shift, stages, cyc, p)
    return LoopCertificate(e, x, entry, loop.reappear, loop.kind, loop.length,
                           changes, infinite, final)


# cell classification


@dataclass
class CellClass:
    """Per-cell tags for the cells that change during one loop.

    ``tags`` come from the pulse shadow (each change raises and lowers a
    shadow cell, and the shadow takes the lim-sup at the reappearance);
    ``direct`` from counting changes in the last simulated units.  ``counts``
    is the number of changes in the loop (None when infinite) and ``parity``
    the final value of a shadow that is flipped once per change.
    """

    tags: dict
    direct: dict
    counts: dict
    shadow: dict
    parity: dict

    def cofinal(self) -> list:
        return sorted(c for c, t in self.tags.items() if t == COFINAL)

    def bounded(self) -> list:
        return sorted(c for c, t in self.tags.items() if t == BOUNDED)


def _final_changes(cert: LoopCertificate) -> list:
    """(offset from the unit start, cell) for every change of a translated final unit."""
    f = cert.final
    return _translation_changes(f.cycle, f.program, ZERO, _window([cert.entry, f.cycle.base]))


def _final_unit_runs(cert: LoopCertificate, units: int = 3):
    """Cells changed in each simulated unit of the final repeating part.

    Exact units are stepped ``units`` times; a translated unit is stepped
    until the window is left behind, after which nothing in it changes.
    """
    f = cert.final
    if f.shift == 0:
        per = []
        seq = f.stages + [f.stages[0]]
        for _ in range(units):
            ch = set()
            for (_, h0, t0), (_, _, t1) in zip(seq, seq[1:]):
                ch.update(_changed_cells(t0, t1, h0))
            per.append(ch)
        return per
    return [{cell for _, cell in _final_changes(cert)}] + [set() for _ in range(units)]


def classify_cells(cert: LoopCertificate, units: int = 3) -> CellClass:
    runs = _final_unit_runs(cert, units)
    last = runs[-units:]
    touched = {cell for _, cell in cert.changes} | set(cert.infinite)
    for r in runs:
        touched |= r
    direct = {c: COFINAL if all(c in r for r in last) else BOUNDED for c in touched}
    # pulse shadow: its lim-sup over the final unit is 1 iff a pulse happens there
    shadow = {c: int(c in last[-1]) for c in touched}
    tags = {c: COFINAL if shadow[c] else BOUNDED for c in touched}
    final = _final_changes(cert) if cert.final.shift else []
    counts, parity = {}, {}
    for c in touched:
        if direct[c] == COFINAL or c in cert.infinite:
            counts[c], parity[c] = None, None
            continue
        n = sum(1 for _, cell in cert.changes + final if cell == c)
        counts[c], parity[c] = n, n % 2
    return CellClass(tags, direct, counts, shadow, parity)


# loop-ordinal writer


def _expand(gap: Ordinal) -> list:
    """Code elements (block exponents, None for a point) summing to ``gap``."""
    out = []
    for exp, coeff in gap.terms:
        out += [None if exp.is_zero else exp] * coeff
    return out


def _writer(cert: LoopCertificate, rounds: int):
    """Stage-0 schedule and its refinement; returns (code, stage-0 offsets)."""
    f = cert.final
    tau = f.start
    classes = classify_cells(cert)
    bounded = classes.bounded()
    cofinal = classes.cofinal()

    stab: dict = {}
    for o, cell in cert.changes:
        stab[cell] = ord_add(o, 1)
    for cell, o in cert.infinite.items():
        if cell not in stab or ord_cmp(stab[cell], o) < 0:
            stab[cell] = o
    if f.shift:
        for i, cell in _final_changes(cert):
            o = ord_add(tau, int(i) + 1)
            if cell not in stab or ord_cmp(stab[cell], o) < 0:
                stab[cell] = o

    positions: dict = {}
    if f.shift == 0:
        seq = f.stages + [f.stages[0]]
        for i, ((_, h0, t0), (_, _, t1)) in enumerate(zip(seq, seq[1:])):
            for cell in _changed_cells(t0, t1, h0):
                positions.setdefault(cell, []).append(i)

    def next_change(cell, cur: Ordinal) -> Ordinal:
        if ord_cmp(cur, tau) < 0:
            k = 0
        else:
            k = int(ord_sub(cur, tau))
        pos = positions[cell]
        m = k
        while m % f.period not in pos:
            m += 1
        return ord_add(tau, m)

    cur = ZERO
    stage0 = [cur]
    for i in range(rounds):
        target = ord_add(cur, 1)
        if i < len(bounded) and ord_cmp(stab.get(bounded[i], ZERO), target) > 0:
            target = stab[bounded[i]]
        cur = target
        stage0.append(cur)
        if cofinal:
            for j in range(min(i + 1, len(cofinal))):
                cur = ord_add(next_change(cofinal[j], cur), 1)
            stage0.append(cur)

    elements, blocks = [], {}
    labels = iter(range(10**9))
    first = [next(labels) for _ in stage0]
    for k, o in enumerate(stage0):
        elements.append(first[k])
        upto = stage0[k + 1] if k + 1 < len(stage0) else cert.length
        for exp in _expand(ord_sub(upto, ord_add(o, 1))):
            n = next(labels)
            elements.append(n)
            if exp is not None:
                blocks[n] = exp
    return OrdinalCode.from_sequence(elements, blocks), stage0


def loop_ordinal_writer(store: ProgramStore, e: int, budgets: Optional[Budgets] = None,
                        x: TapeRep = BLANK, rounds: int = DEFAULT_ROUNDS) -> OrdinalCode:
    """Code of the loop length of ``e`` on ``x``."""
    return first_looping_snapshot(store, e, budgets, x, rounds).stage_order


# eventually writable to writable


def ev_to_writable_transform(store: ProgramStore, e: int) -> int:
    """Register a program that outputs the eventual output of ``e``.

    It follows ``e`` from output change to output change; before following
    the next one it asks whether the continuation of ``e`` from the current
    snapshot changes the output again (halting when it does).  On no, the
    current output is final and it halts with it.
    """
    target = store.get(e)
    if isinstance(target, DriverProgram):
        raise ValueError("the transform needs a machine program")

    def drive(call: OracleCall, oracle, budgets: Budgets) -> Verdict:
        snap = start_snapshot(OracleCall(e, call.parameter))
        seen = {}
        for k in range(budgets.max_calls):
            key = snap.config()
            if key in seen:
                return diverges(snap.clock, detail="the followed snapshots repeat")
            seen[key] = k
            ans = oracle(OracleCall(e, call.parameter, resume=snap, stop="output-change"))
            if ans.kind == DIVERGES:
                return converges(snap.output, snap.clock, final=snap)
            if ans.kind != CONVERGES:
                return ans
            v = Runner(target, snap, budgets, oracle, output_change_stop(snap)).run()
            if v.kind != CONVERGES:
                return v
            if v.final.state == "halt":
                return converges(v.output, v.final.clock, final=v.final)
            snap = v.final
        return unknown(LIMIT_BUDGET, detail="too many output changes followed")

    return store.add(DriverProgram(f"ev_{target.name}", drive,
                                   doc=f"eventual output of {target.name}"))
