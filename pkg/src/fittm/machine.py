"""Single-machine stepping, cycle detection and the transfinite runner.

A run alternates oracle-free *blocks* of successor steps with limit stages.
A block ends when the machine halts, enters the query state, or a cycle is
found: either an exact configuration repeat or a translation repeat (same
state, head moved right, tapes agreeing from the leftmost cell the period
visited).  A cycle is extrapolated to its limit snapshot with the lim-sup
rule.

Limit snapshots and the configurations reached right after answered oracle
calls are *checkpoints*.  Whenever a checkpoint repeats an earlier one, the
stretch between them recurs forever; its limit is computed the same way, and
the run is certified divergent exactly when that limit equals the repeated
configuration (the loop cannot be escaped).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import CapExceeded, UndecodableOracleTape
from .ordinal import OMEGA, Ordinal, ord_add, ord_cmp, ord_sub, omega_times
from .program import (
    HALT, INDEX, LIMIT, ORDINAL, OUTPUT, PARAM, PBLANK, QUERY, L,
    OracleCall, Program, Snapshot, Transition, decode_natural, decode_ordinal_tape,
    initial_snapshot,
)
from .tape import TapeRep, tape_shift_equal
from .verdict import (
    CLOCK_CAP, CONVERGES, DIVERGES, FREEZES, LIMIT_BUDGET, STEP_BUDGET, UNREPRESENTABLE,
    Budgets, Verdict, converges, diverges, freezes, unknown,
)

TRANSLATION_LOOKBACK = 6


class Unrepresentable(Exception):
    """A limit tape is not eventually constant."""


# successor steps


@dataclass(frozen=True)
class Halted:
    snapshot: Snapshot


@dataclass(frozen=True)
class Called:
    snapshot: Snapshot
    call: OracleCall
    answers: tuple


def _apply(p: Program, state: str, head: int, tapes: tuple):
    """One transition; returns (transition, head, tapes, bumped)."""
    read = tuple(tapes[r].read(head) for r in p.tapes)
    try:
        tr: Transition = p.transitions[(state, read)]
    except KeyError:
        raise UndecodableOracleTape(f"{p.name}: no transition for {state} on {read}") from None
    new = tapes
    for r, w in zip(p.tapes, tr.write):
        if w is not None and new[r].read(head) != w:
            if new is tapes:
                new = list(tapes)
            new[r] = new[r].write(head, w)
    if new is not tapes:
        new = tuple(new)
    bumped = False
    head += tr.move
    if head < 0:
        head, bumped = 0, True
    return tr, head, new, bumped


def decode_call(tapes: tuple, with_ordinal: bool = False) -> OracleCall:
    index = decode_natural(tapes[INDEX], "index")
    ordinal = None
    if with_ordinal:
        try:
            ordinal = decode_ordinal_tape(tapes[ORDINAL])
        except CapExceeded as exc:
            raise UndecodableOracleTape(f"ordinal tape: {exc}") from exc
    return OracleCall(index, tapes[PARAM], ordinal)


def step(s: Snapshot, p: Program, with_ordinal: bool = False):
    """Apply one transition: a Snapshot, or a Halted / Called event."""
    if s.state == HALT:
        raise ValueError("cannot step a halted snapshot")
    tr, head, tapes, _ = _apply(p, s.state, s.head, s.tapes)
    nxt = Snapshot(tr.next, head, tapes, ord_add(s.clock, 1))
    if tr.next == HALT:
        return Halted(nxt)
    if tr.next == QUERY:
        return Called(nxt, decode_call(tapes, with_ordinal), tr.answers)
    return nxt


# blocks


@dataclass
class Cycle:
    """``base`` recurs (shifted right by ``shift``) after ``period`` steps.

    ``after`` are the tapes one period later, ``lowest`` the leftmost head
    position during the period, ``period_tapes`` the tapes at each stage of
    one period (exact cycles only need these for the lim-sup).
    """

    base: Snapshot
    period: int
    shift: int
    after: tuple
    lowest: int
    period_tapes: list = field(default_factory=list, repr=False)
    period_states: list = field(default_factory=list, repr=False)
    period_heads: list = field(default_factory=list, repr=False)


@dataclass
class BlockOutcome:
    kind: str  # halted | oracle_call | cycle | budget_exhausted | stopped
    last: Snapshot
    call: Optional[OracleCall] = None
    answers: Optional[tuple] = None
    cycle: Optional[Cycle] = None
    stage_or: tuple = ()
    history: Optional[list] = field(default=None, repr=False)

    @property
    def output(self) -> TapeRep:
        return self.last.tapes[OUTPUT]


def _or_tapes(a: tuple, b: tuple) -> tuple:
    return tuple(x if x == y else x | y for x, y in zip(a, b))


def run_block(s: Snapshot, p: Program, max_steps: int, stop: Optional[Callable] = None,
              with_ordinal: bool = False, record: bool = False) -> BlockOutcome:
    """Step from ``s`` until halt, query, cycle, stop condition or budget."""
    state, head, tapes = s.state, s.head, s.tapes
    states, heads, tapelist = [state], [head], [tapes]
    bumps = [0]
    seen = {(state, head, tapes): 0}
    by_state: dict[str, list[int]] = {state: [0]}
    acc = list(tapes)

    def snap(t):
        return Snapshot(states[t], heads[t], tapelist[t], ord_add(s.clock, t))

    def outcome(kind, t, **kw):
        return BlockOutcome(kind, snap(t), stage_or=tuple(acc),
                            history=(states, heads, tapelist, bumps), **kw)

    for t in range(1, max_steps + 1):
        tr, head, new, bumped = _apply(p, state, head, tapes)
        if new is not tapes:
            for r in range(len(new)):
                if new[r] is not tapes[r] and new[r].read(heads[-1]) == 1 and acc[r].read(heads[-1]) == 0:
                    acc[r] = acc[r].write(heads[-1], 1)
        state, tapes = tr.next, new
        states.append(state)
        heads.append(head)
        tapelist.append(tapes)
        bumps.append(bumps[-1] + bumped)
        if state == HALT:
            return outcome("halted", t)
        if state == QUERY:
            return outcome("oracle_call", t, call=decode_call(tapes, with_ordinal), answers=tr.answers)
        if stop is not None and stop(tapes):
            return outcome("stopped", t)
        key = (state, head, tapes)
        t0 = seen.get(key)
        if t0 is not None:
            cyc = Cycle(snap(t0), t - t0, 0, tapes, min(heads[t0:t + 1]),
                        tapelist[t0:t], states[t0:t], heads[t0:t])
            return outcome("cycle", t, cycle=cyc)
        seen[key] = t
        earlier = by_state.setdefault(state, [])
        for t0 in reversed(earlier[-TRANSLATION_LOOKBACK:]):
            if heads[t0] >= head or bumps[t] != bumps[t0]:
                continue
            lowest = min(heads[t0:t + 1])
            behind = heads[t0] - lowest
            base_tapes = tapelist[t0]
            if all(tape_shift_equal(base_tapes[r], heads[t0], tapes[r], head, behind) is not None
                   for r in range(len(tapes))):
                cyc = Cycle(snap(t0), t - t0, head - heads[t0], tapes, lowest,
                            tapelist[t0:t], states[t0:t], heads[t0:t])
                return outcome("cycle", t, cycle=cyc)
        earlier.append(t)
    return outcome("budget_exhausted", max_steps)


# limits


def limit_clock(base_clock: Ordinal, period: Ordinal) -> Ordinal:
    """Stage reached by repeating ``period`` omega times after ``base_clock``."""
    return ord_add(base_clock, omega_times(period))


def _translation_limit_tape(a: TapeRep, b: TapeRep, lowest: int, shift: int) -> TapeRep:
    pattern = b.bits(lowest + shift)[lowest:]
    if len(set(pattern)) != 1:
        raise Unrepresentable("translated cycle leaves a non-constant periodic tape")
    return a.prefix(lowest, TapeRep((), pattern[0]))


def extrapolate_limit(c: Cycle) -> Snapshot:
    """Limit snapshot of a cycle repeated omega times."""
    if c.shift == 0:
        tapes = c.period_tapes[0]
        for tt in c.period_tapes[1:]:
            tapes = _or_tapes(tapes, tt)
    else:
        tapes = tuple(_translation_limit_tape(a, b, c.lowest, c.shift)
                      for a, b in zip(c.base.tapes, c.after))
    return Snapshot(LIMIT, 0, tapes, limit_clock(c.base.clock, c.period))


def cycle_stage_or(c: Cycle, p: Program) -> tuple:
    """OR of the tapes over every stage of the cycle repeated omega times."""
    if c.shift == 0:
        acc = c.period_tapes[0]
        for tt in c.period_tapes[1:]:
            acc = _or_tapes(acc, tt)
        return acc
    k = c.shift
    width = max(max(t.extent for t in c.base.tapes), c.base.head) + 3 * k + 1
    periods = (width - c.lowest) // k + 2
    state, head, tapes = c.base.state, c.base.head, c.base.tapes
    acc = list(tapes)
    for _ in range(periods * c.period):
        tr, head, tapes, _ = _apply(p, state, head, tapes)
        state = tr.next
        acc = [x if x == y else x | y for x, y in zip(acc, tapes)]
    out = []
    for t in acc:
        bits = t.bits(width)
        pattern = bits[width - k:]
        if len(set(pattern)) != 1:
            raise Unrepresentable("stage lim-sup over a translated cycle is not eventually constant")
        out.append(TapeRep.from_bits(bits, pattern[0]))
    return tuple(out)


# checkpoints


@dataclass
class Checkpoint:
    snapshot: Snapshot
    stage_or: tuple  # OR of all stages since the previous checkpoint, both ends included
    kind: str  # start | limit | answer


@dataclass
class LoopInfo:
    """Certificate data for a divergent run.

    ``entry`` recurs at the limit stage ``reappear`` and the stretch
    ``[entry.clock, reappear)`` repeats forever afterwards.
    """

    entry: Snapshot
    reappear: Ordinal
    kind: str  # block | checkpoint
    cycle: Optional[Cycle] = None

    @property
    def length(self) -> Ordinal:
        return ord_sub(self.reappear, self.entry.clock)


def checkpoint_limit(history: list) -> Optional[tuple]:
    """Check the newest checkpoint against earlier ones.

    Returns None when it repeats nothing, otherwise ``(j, limit, diverged,
    stage_or)`` where ``j`` is the index of the repeated checkpoint, ``limit``
    the snapshot at the limit of the repeating stretch and ``stage_or`` the
    OR of the tapes over that stretch.
    """
    newest = history[-1].snapshot
    for j in range(len(history) - 2, -1, -1):
        base = history[j].snapshot
        if not base.same_config(newest):
            continue
        if any(cp.stage_or is None for cp in history[j + 1:]):
            raise Unrepresentable("stage lim-sup across a translated call loop is not tracked")
        tapes = history[j + 1].stage_or
        for cp in history[j + 2:]:
            tapes = _or_tapes(tapes, cp.stage_or)
        period = ord_sub(newest.clock, base.clock)
        limit = Snapshot(LIMIT, 0, tapes, limit_clock(base.clock, period))
        return j, limit, limit.same_config(base), limit.tapes
    return None


# runner

Oracle = Callable[[OracleCall], Verdict]


class Runner:
    """Runs one machine from a snapshot, consulting ``oracle`` on calls."""

    def __init__(self, program: Program, start: Snapshot, budgets: Budgets,
                 oracle: Optional[Oracle] = None, stop: Optional[Callable] = None,
                 with_ordinal: bool = False, record: bool = False):
        self.program = program
        self.start = start
        self.budgets = budgets
        self.oracle = oracle
        self.stop = stop
        self.with_ordinal = with_ordinal
        self.record = record
        self.events: list = []
        self.checkpoints: list[Checkpoint] = []
        self.limits = 0
        self.calls = 0

    def _over_cap(self, clock: Ordinal) -> bool:
        return ord_cmp(clock, self.budgets.clock_cap) >= 0

    def run(self) -> Verdict:
        try:
            return self._run()
        except CapExceeded as exc:
            return unknown(CLOCK_CAP, detail=str(exc))
        except Unrepresentable as exc:
            return unknown(UNREPRESENTABLE, detail=str(exc))

    def _run(self) -> Verdict:
        p, b = self.program, self.budgets
        snap = self.start
        self.checkpoints = [Checkpoint(snap, snap.tapes, "start")]
        acc = snap.tapes
        while True:
            out = run_block(snap, p, b.max_steps_per_block, self.stop, self.with_ordinal, self.record)
            acc = _or_tapes(acc, out.stage_or)
            if self.record:
                self.events.append(("block", snap, out))
            if out.kind == "halted" or out.kind == "stopped":
                return converges(out.output, out.last.clock, final=out.last)
            if out.kind == "budget_exhausted":
                return unknown(STEP_BUDGET, out.last.clock, final=out.last)
            if out.kind == "oracle_call":
                if self.oracle is None:
                    raise UndecodableOracleTape(f"{p.name} entered the query state with no oracle")
                self.calls += 1
                if self.calls > b.max_calls:
                    return unknown(LIMIT_BUDGET, out.last.clock, detail="too many oracle calls",
                                   final=out.last)
                v = self.oracle(out.call)
                if self.record:
                    self.events.append(("call", out.call, v))
                if v.kind == FREEZES:
                    return freezes(v.witness, out.last.clock, final=out.last)
                if v.kind not in (CONVERGES, DIVERGES):
                    return unknown(v.reason, out.last.clock, detail=v.detail, final=out.last)
                yes, no = out.answers
                q = out.last
                post = Snapshot(yes if v.kind == CONVERGES else no, q.head, q.tapes, ord_add(q.clock, 1))
                if post.state == HALT:
                    return converges(post.output, post.clock, final=post)
                verdict = self._checkpoint(post, acc, "answer", block=(snap, out))
                if verdict is not None:
                    return verdict
                snap, acc = self._resume, self._resume.tapes
                continue
            # cycle
            cyc = out.cycle
            limit = extrapolate_limit(cyc)
            acc = _or_tapes(acc, cycle_stage_or(cyc, p))
            if self._over_cap(limit.clock):
                return unknown(CLOCK_CAP, limit.clock, final=limit)
            self.limits += 1
            if self.limits > b.max_limit_stages:
                return unknown(LIMIT_BUDGET, limit.clock, final=limit)
            if self.record:
                self.events.append(("limit", cyc, limit))
            if self.stop is not None and self.stop(limit.tapes):
                return converges(limit.output, limit.clock, final=limit)
            if limit.same_config(cyc.base):
                return diverges(limit.clock, loop=LoopInfo(cyc.base, limit.clock, "block", cyc),
                                final=limit)
            verdict = self._checkpoint(limit, acc, "limit")
            if verdict is not None:
                return verdict
            snap, acc = self._resume, self._resume.tapes

    def _checkpoint(self, snap: Snapshot, acc: tuple, kind: str, block=None) -> Optional[Verdict]:
        """Record a checkpoint; follow repeated checkpoints to their limits."""
        b = self.budgets
        self.checkpoints.append(Checkpoint(snap, _or_tapes(acc, snap.tapes), kind))
        while True:
            found = checkpoint_limit(self.checkpoints)
            if found is None and block is not None:
                found = self._translated_answer(block)
                block = None
            if found is None:
                self._resume = self.checkpoints[-1].snapshot
                return None
            j, limit, diverged, stage_or = found
            base = self.checkpoints[j].snapshot
            newest = self.checkpoints[-1].snapshot
            if diverged:
                reappear = newest.clock if newest.clock.is_limit else limit.clock
                return diverges(reappear, loop=LoopInfo(base, reappear, "checkpoint"), final=limit)
            if self._over_cap(limit.clock):
                return unknown(CLOCK_CAP, limit.clock, final=limit)
            self.limits += 1
            if self.limits > b.max_limit_stages:
                return unknown(LIMIT_BUDGET, limit.clock, final=limit)
            if self.record:
                self.events.append(("macro", j, limit))
            self.checkpoints.append(Checkpoint(limit, stage_or, "limit"))

    def _translated_answer(self, block) -> Optional[tuple]:
        """Translation repeat between the last two answer checkpoints.

        Applies when the block between them issued a call without touching
        the oracle tapes and the machine state recurs shifted right, so every
        later period issues the same call and gets the same answer.
        """
        start, out = block
        if len(self.checkpoints) < 2 or self.checkpoints[-2].snapshot is not start:
            return None
        prev, post = start, self.checkpoints[-1].snapshot
        shift = post.head - prev.head
        states, heads, tapelist, bumps = out.history
        if prev.state != post.state or shift <= 0 or bumps[-1]:
            return None
        for r in (INDEX, PARAM, ORDINAL, PBLANK):
            if any(tt[r] != prev.tapes[r] for tt in tapelist):
                return None
        lowest = min(heads)
        behind = prev.head - lowest
        if not all(tape_shift_equal(a, prev.head, c, post.head, behind) is not None
                   for a, c in zip(prev.tapes, post.tapes)):
            return None
        tapes = tuple(_translation_limit_tape(a, c, lowest, shift)
                      for a, c in zip(prev.tapes, post.tapes))
        period = ord_sub(post.clock, prev.clock)
        limit = Snapshot(LIMIT, 0, tapes, limit_clock(prev.clock, period))
        # transients of the swept cells are not tracked, so a stretch spanning
        # this limit cannot be extrapolated further
        return len(self.checkpoints) - 2, limit, limit.same_config(prev), None


def run(p: Program, input_tape: TapeRep, budgets: Budgets, oracle: Optional[Oracle] = None,
        **kw) -> Verdict:
    """Run ``p`` on ``input_tape`` from the start state."""
    return Runner(p, initial_snapshot(input_tape), budgets, oracle, **kw).run()


def run_from(p: Program, start: Snapshot, budgets: Budgets, oracle: Optional[Oracle] = None,
             **kw) -> Verdict:
    return Runner(p, start, budgets, oracle, **kw).run()
