"""Least fixed point of the monotone operator on (down, up) pairs of calls."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import IterationBudgetExceeded
from .feedback import FEEDBACK, Evaluator, start_snapshot
from .machine import Runner
from .program import DriverProgram, OracleCall
from .store import ProgramStore
from .verdict import CONVERGES, DIVERGES, Budgets, Verdict, converges, diverges


@dataclass(frozen=True)
class OraclePair:
    down: frozenset = field(default_factory=frozenset)
    up: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "down", frozenset(self.down))
        object.__setattr__(self, "up", frozenset(self.up))
        if self.down & self.up:
            raise ValueError("down and up must be disjoint")

    def __le__(self, other: "OraclePair") -> bool:
        return self.down <= other.down and self.up <= other.up

    def status(self, call: OracleCall) -> str:
        if call in self.down:
            return "down"
        if call in self.up:
            return "up"
        return "undecided"


class _Undecided(Exception):
    pass


def run_against(store: ProgramStore, call: OracleCall, pair: OraclePair,
                budgets: Budgets) -> Optional[Verdict]:
    """Run ``call`` answering its questions from ``pair``; None if it asks
    about a call the pair does not settle."""

    def oracle(c: OracleCall) -> Verdict:
        if c in pair.down:
            return converges(None)
        if c in pair.up:
            return diverges()
        raise _Undecided

    p = store.get(call.index)
    try:
        if isinstance(p, DriverProgram):
            return p.drive(call, oracle, budgets)
        return Runner(p, start_snapshot(call), budgets, oracle).run()
    except _Undecided:
        return None


def apply_operator(pair: OraclePair, universe: Iterable[OracleCall], store: ProgramStore,
                   budgets: Optional[Budgets] = None) -> OraclePair:
    """One application, joined with the input pair."""
    b = budgets or Budgets()
    down, up = set(pair.down), set(pair.up)
    for call in universe:
        if call in down or call in up:
            continue
        v = run_against(store, call, pair, b)
        if v is None:
            continue
        if v.kind == CONVERGES:
            down.add(call)
        elif v.kind == DIVERGES:
            up.add(call)
    return OraclePair(down, up)


def lfp(universe: Iterable[OracleCall], store: ProgramStore,
        budgets: Optional[Budgets] = None) -> tuple[OraclePair, int]:
    """Iterate from the empty pair; returns the fixed point and the number of
    operator applications (the last one confirms stability)."""
    b = budgets or Budgets()
    universe = list(dict.fromkeys(universe))
    if not universe:
        raise ValueError("universe must be nonempty")
    pair = OraclePair()
    for i in range(1, b.max_lfp_iters + 1):
        nxt = apply_operator(pair, universe, store, b)
        if nxt == pair:
            return pair, i
        pair = nxt
    raise IterationBudgetExceeded(f"no fixed point within {b.max_lfp_iters} iterations")


def call_closure(store: ProgramStore, calls: Iterable[OracleCall], budgets: Optional[Budgets] = None,
                 cap: int = 20) -> list[OracleCall]:
    """Add every call the evaluation of a member makes, until closed or ``cap``."""
    b = budgets or Budgets()
    out = list(dict.fromkeys(calls))
    seen = set(out)
    i = 0
    while i < len(out):
        ev = Evaluator(store, b, FEEDBACK)
        ev.evaluate(out[i])
        for node in ev.tree.nodes[1:]:
            c = node.call
            if c not in seen:
                if len(out) >= cap:
                    return out
                seen.add(c)
                out.append(c)
        i += 1
    return out


def lfp_table(pair: OraclePair, labels: dict) -> list[tuple[str, str]]:
    return [(name, pair.status(call)) for name, call in labels.items()]
