"""Oracle disciplines: strong jump, ordinal oracle and iterated machines,
parallel calls, and the converge/diverge flip."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .feedback import FEEDBACK, IITM, JUMP, ORDINAL_MODE, Evaluator, SubTree
from .ordinal import Ordinal
from .program import OracleCall
from .store import ProgramStore
from .synth import flip_program
from .tape import BLANK, TapeRep
from .verdict import CONVERGES, DIVERGES, FREEZES, Budgets, Verdict

TIERS = (1 / 16, 1 / 4, 1)


@dataclass
class JumpResult:
    answer: str  # in | out | unknown
    verdict: Verdict
    tree: SubTree


def strong_jump(store: ProgramStore, e: int, x: TapeRep = BLANK,
                budgets: Optional[Budgets] = None) -> JumpResult:
    """Depth-1 evaluation: the root may ask questions, its children may not.

    A child entering the query state raises DepthViolation (with ``.tree``).
    """
    ev = Evaluator(store, budgets or Budgets(), JUMP)
    v = ev.root(e, x)
    answer = {CONVERGES: "in", DIVERGES: "out"}.get(v.kind, "unknown")
    return JumpResult(answer, v, ev.tree)


def ordinal_oracle_run(store: ProgramStore, e: int, alpha: Ordinal, x: TapeRep = BLANK,
                       y: TapeRep = BLANK, budgets: Optional[Budgets] = None,
                       record: bool = False):
    """Run ``e`` carrying ``alpha``; every call must pass some smaller ordinal.

    ``x`` goes on the input tape and ``y`` on the oracle parameter tape.
    Returns (verdict, tree); violations raise OrdinalViolation.
    """
    ev = Evaluator(store, budgets or Budgets(), ORDINAL_MODE, record)
    v = ev.root(e, x, Ordinal.of(alpha), param=y)
    return v, ev.tree


def iitm_run(store: ProgramStore, e: int, x: TapeRep = BLANK,
             budgets: Optional[Budgets] = None, record: bool = False):
    """The root may call ordinal oracle machines with any ordinal it writes."""
    ev = Evaluator(store, budgets or Budgets(), IITM, record)
    v = ev.root(e, x)
    return v, ev.tree


@dataclass
class ParallelVerdict:
    kind: str  # yes | no | freezes | unknown
    witness: Optional[int] = None
    budget_relative: bool = False
    outcomes: dict = field(default_factory=dict, repr=False)  # instance -> Verdict

    def __str__(self) -> str:
        if self.kind in ("yes", "freezes"):
            return f"{self.kind}({self.witness})"
        if self.kind == "no":
            return "no(budget_relative)"
        return "unknown"


def dovetail(n_instances: int, n_tiers: int = len(TIERS)):
    """(instance, tier) pairs along diagonals instance + tier = d."""
    for d in range(n_instances + n_tiers - 1):
        for t in range(n_tiers):
            n = d - t
            if 0 <= n < n_instances:
                yield n, t


def parallel_call(store: ProgramStore, e: int, param: TapeRep = BLANK,
                  budgets: Optional[Budgets] = None) -> ParallelVerdict:
    """Run ``e`` on ``param`` with every n < max_parallel on the blank tape.

    Yes as soon as some instance converges.  Freezes only when some instance
    freezes and every other one diverges; no when all diverge (relative to
    the finitely many instances examined); unknown otherwise.
    """
    b = budgets or Budgets()
    settled: dict[int, Verdict] = {}
    last: dict[int, Verdict] = {}
    for n, t in dovetail(b.max_parallel):
        if n in settled:
            continue
        ev = Evaluator(store, b.scaled(TIERS[t]), FEEDBACK)
        v = ev.evaluate(OracleCall(e, param, instance=n))
        last[n] = v
        if v.kind == CONVERGES:
            return ParallelVerdict("yes", n, outcomes={**last})
        if v.kind in (DIVERGES, FREEZES):
            settled[n] = v
    frozen = sorted(n for n, v in settled.items() if v.kind == FREEZES)
    if len(settled) == b.max_parallel:
        if frozen:
            return ParallelVerdict("freezes", frozen[0], outcomes=last)
        return ParallelVerdict("no", budget_relative=True, outcomes=last)
    return ParallelVerdict("unknown", outcomes=last)


def build_flip_program(store: ProgramStore, e: int) -> int:
    """Register the program that asks about (e, own input) and diverges on
    yes, halts on no.  Returns its id."""
    target = store.get(e)
    p = flip_program(e, f"flip_{target.name}").build()
    return store.add(p)
