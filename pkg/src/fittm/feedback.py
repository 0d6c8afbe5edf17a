"""Tree-of-subcomputations evaluation.

Each oracle call spawns a child node that runs to completion before its
parent resumes, which is how control moves in a well-founded tree.  A call
identical to one of its ancestors can only spawn the same chain again, so the
tree is ill-founded and the run freezes; the chain from the ancestor down to
the repeat is the witness.  Reaching the depth budget without such a repeat
is only Unknown.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import (
    DepthViolation, OrdinalViolation, UndecodableOracleTape, UnknownProgram,
)
from .machine import Runner, checkpoint_limit
from .ordinal import ZERO, Ordinal, format_ordinal
from .program import (
    INPUT, NTAPES, OUTPUT, PARAM, PBLANK, START, DriverProgram, OracleCall, Snapshot,
    encode_natural, encode_ordinal_tape,
)
from .store import ProgramStore
from .tape import BLANK, TapeRep, format_tape
from .verdict import (
    CONVERGES, DEPTH_BUDGET, DIVERGES, FREEZES, LIMIT_BUDGET, MACHINE_ERROR, UNKNOWN,
    Budgets, Verdict, freezes, unknown,
)

FEEDBACK, JUMP, ORDINAL_MODE, IITM = "feedback", "jump", "ordinal", "iitm"

ACTIVE, CONVERGED, DIVERGED, FROZEN, UNDECIDED = "active", "converged", "diverged", "frozen", "unknown"
STATUS_OF = {CONVERGES: CONVERGED, DIVERGES: DIVERGED, FREEZES: FROZEN, UNKNOWN: UNDECIDED}


@dataclass
class Node:
    id: int
    label: str
    call: Optional[OracleCall]
    parent: Optional[int]
    children: list = field(default_factory=list)
    status: str = ACTIVE
    final: Optional[Snapshot] = None
    clock: Optional[Ordinal] = None
    alpha: Optional[Ordinal] = None
    depth: int = 0


@dataclass
class SubTree:
    nodes: list = field(default_factory=list)
    control: Optional[int] = None

    def add(self, label: str, call, parent: Optional[int], alpha=None) -> Node:
        depth = 0 if parent is None else self.nodes[parent].depth + 1
        node = Node(len(self.nodes), label, call, parent, alpha=alpha, depth=depth)
        self.nodes.append(node)
        if parent is not None:
            self.nodes[parent].children.append(node.id)
        return node

    @property
    def root(self) -> Node:
        return self.nodes[0]

    def path(self, nid: int) -> list[Node]:
        out = []
        while nid is not None:
            out.append(self.nodes[nid])
            nid = self.nodes[nid].parent
        return out[::-1]

    def leaves(self) -> list[Node]:
        return [n for n in self.nodes if not n.children]

    def __len__(self) -> int:
        return len(self.nodes)


def verdict_name(v: Verdict) -> str:
    return f"{UNKNOWN}({v.reason})" if v.kind == UNKNOWN else v.kind


def start_snapshot(call: OracleCall, alpha: Optional[Ordinal] = None) -> Snapshot:
    """Initial configuration of a node.

    The input tape holds the parameter.  The blank tape holds the node's own
    ordinal under an ordinal discipline, or the instance number of a parallel
    call.  The oracle ordinal tape starts blank, so a call that leaves it
    alone passes 0.
    """
    if call.resume is not None:
        return call.resume
    tapes = [BLANK] * NTAPES
    tapes[INPUT] = call.parameter
    if alpha is not None:
        tapes[PBLANK] = TapeRep.from_bits(encode_ordinal_tape(alpha))
    if call.instance is not None:
        tapes[PBLANK] = TapeRep.from_bits(encode_natural(call.instance))
    return Snapshot(START, 0, tuple(tapes), ZERO)


def output_change_stop(start: Snapshot):
    base = start.output

    def stop(tapes):
        return tapes[OUTPUT] != base
    return stop


class Evaluator:
    """Evaluates one root computation and builds its tree.

    ``mode`` selects the oracle discipline: plain feedback, the strong jump
    (children may not ask questions), ordinal oracle machines (each call
    carries a smaller ordinal) or iterated machines (the root may pick any
    ordinal).
    """

    def __init__(self, store: ProgramStore, budgets: Budgets, mode: str = FEEDBACK,
                 record: bool = False):
        self.store = store
        self.budgets = budgets
        self.mode = mode
        self.record = record
        self.tree = SubTree()
        self.cache: dict[OracleCall, Verdict] = {}
        self.runners: dict[int, Runner] = {}

    @property
    def with_ordinal(self) -> bool:
        return self.mode in (ORDINAL_MODE, IITM)

    def root(self, e: int, x: TapeRep = BLANK, alpha: Optional[Ordinal] = None,
             param: TapeRep = BLANK, instance: Optional[int] = None,
             resume: Optional[Snapshot] = None, stop: Optional[str] = None) -> Verdict:
        self.store.get(e)
        call = OracleCall(e, x, alpha if self.with_ordinal else None, instance, resume, stop)
        node = self.tree.add(f"root {call.label()}", call, None, alpha)
        start = start_snapshot(call, alpha)
        if param is not BLANK:
            tapes = list(start.tapes)
            tapes[PARAM] = param
            start = Snapshot(start.state, start.head, tuple(tapes), start.clock)
        return self._run_node(node, call, (call,), alpha, start)

    def evaluate(self, call: OracleCall) -> Verdict:
        """Evaluate a bare call as a root (feedback or jump mode)."""
        return self.root(call.index, call.parameter, call.ordinal, instance=call.instance,
                         resume=call.resume, stop=call.stop)

    def _run_node(self, node: Node, call: OracleCall, ancestors: tuple,
                  alpha: Optional[Ordinal], start: Optional[Snapshot] = None) -> Verdict:
        self.tree.control = node.id
        try:
            p = self.store.get(call.index)
        except UnknownProgram as exc:
            v = unknown(MACHINE_ERROR, detail=str(exc))
            return self._finish(node, v)

        def oracle(c: OracleCall) -> Verdict:
            v = self._child(node, c, ancestors, alpha)
            self.tree.control = node.id
            return v

        if isinstance(p, DriverProgram):
            v = p.drive(call, oracle, self.budgets)
            return self._finish(node, v)
        start = start or start_snapshot(call, alpha if self.with_ordinal else None)
        stop = output_change_stop(start) if call.stop == "output-change" else None
        runner = Runner(p, start, self.budgets, oracle, stop, self.with_ordinal, self.record)
        if self.record:
            self.runners[node.id] = runner
        try:
            v = runner.run()
        except UndecodableOracleTape as exc:
            if self.with_ordinal and node.parent is not None:
                raise OrdinalViolation(f"{p.name}: {exc}", self.tree) from exc
            if self.mode == IITM:
                raise
            v = unknown(MACHINE_ERROR, detail=str(exc))
        return self._finish(node, v)

    def _finish(self, node: Node, v: Verdict) -> Verdict:
        node.status = STATUS_OF[v.kind]
        node.final = v.final
        node.clock = v.clock
        if node.parent is None:
            self.tree.control = None
        return v

    def _child(self, parent: Node, c: OracleCall, ancestors: tuple,
               alpha: Optional[Ordinal]) -> Verdict:
        b = self.budgets
        if self.mode == JUMP and parent.depth >= 1:
            self.tree.add(f"call {c.label()}", c, parent.id).status = UNDECIDED
            raise DepthViolation(f"node {parent.id} asked a question below the root", self.tree)
        child_alpha = None
        if self.with_ordinal:
            beta = c.ordinal
            if alpha is not None and not beta < alpha:
                self.tree.add(f"call {c.label()}", c, parent.id, beta).status = UNDECIDED
                raise OrdinalViolation(
                    f"node {parent.id} passed {format_ordinal(beta)}, not below "
                    f"{format_ordinal(alpha)}", self.tree)
            child_alpha = beta
        if len(self.tree) >= b.max_nodes:
            return unknown(LIMIT_BUDGET, detail="node budget exhausted")
        node = self.tree.add(f"call {c.label()}", c, parent.id, child_alpha)
        for i, a in enumerate(ancestors):
            if a == c:
                node.status = FROZEN
                return freezes(ancestors[i:] + (c,), detail="call repeats an ancestor")
        if node.depth > b.max_depth:
            node.status = UNDECIDED
            return unknown(DEPTH_BUDGET, detail=f"depth {node.depth}")
        if c in self.cache:
            v = self.cache[c]
            node.status, node.clock = STATUS_OF[v.kind], v.clock
            return v
        v = self._run_node(node, c, ancestors + (c,), child_alpha)
        if v.kind == FREEZES and self.with_ordinal:
            raise AssertionError("internal fault: an ordinal-disciplined call froze")
        if v.decided:
            self.cache[c] = v
        return v


def eval_feedback(store: ProgramStore, e: int, x: TapeRep = BLANK,
                  budgets: Optional[Budgets] = None, record: bool = False):
    """Feedback semantics of program ``e`` on input ``x``: (verdict, tree)."""
    ev = Evaluator(store, budgets or Budgets(), FEEDBACK, record)
    v = ev.root(e, x)
    return v, ev.tree


def replay_witness(store: ProgramStore, witness: tuple, budgets: Budgets) -> bool:
    """Check that each call of a freezing witness goes on to make the next one."""
    if len(witness) < 2 or witness[0] != witness[-1]:
        return False

    class Found(Exception):
        pass

    for a, nxt in zip(witness, witness[1:]):
        side = Evaluator(store, budgets, FEEDBACK)

        def oracle(c, nxt=nxt, side=side):
            if c == nxt:
                raise Found
            v = side.evaluate(c)
            if not v.decided:
                raise LookupError("sibling call undecided")
            return v

        p = store.get(a.index)
        try:
            Runner(p, start_snapshot(a), budgets, oracle).run()
        except Found:
            continue
        except LookupError:
            return False
        return False
    return True


@dataclass
class MacroStep:
    kind: str  # continue | diverged
    snapshot: Snapshot
    entry: int


def node_limit_extrapolate(history: list) -> Optional[MacroStep]:
    """Extrapolate a node's checkpoint history (see machine.Checkpoint).

    Returns None while no checkpoint repeats, otherwise the limit snapshot of
    the repeating stretch, marked diverged when it equals the repeated one.
    """
    if sum(cp.kind == "answer" for cp in history) < 2:
        raise ValueError("needs a node that has made at least two oracle calls")
    found = checkpoint_limit(history)
    if found is None:
        return None
    j, limit, diverged, _ = found
    return MacroStep("diverged" if diverged else "continue", limit, j)


def level_widths(tree: SubTree) -> list[int]:
    """Number of nodes at each depth; observed only, never classified."""
    widths: list[int] = []
    for n in tree.nodes:
        if n.depth == len(widths):
            widths.append(0)
        widths[n.depth] += 1
    return widths


def export_tree(tree: SubTree, verdict: Verdict, budgets: Budgets, error: str = "") -> dict:
    """Deterministic trace record; keys in a fixed order."""
    rec = {
        "verdict": verdict_name(verdict) if verdict is not None else "Error",
        "clock": format_ordinal(verdict.clock) if verdict is not None and verdict.clock is not None else None,
        "budgets": budgets.to_dict(),
        "tree": [
            {
                "id": n.id,
                "parent": n.parent,
                "label": n.label,
                "status": n.status,
                "clock": format_ordinal(n.clock) if n.clock is not None else None,
            }
            for n in tree.nodes
        ],
        "tapes": {"output": format_tape(verdict.output)
                  if verdict is not None and verdict.output is not None else None},
        "widths": level_widths(tree),
    }
    if error:
        rec["error"] = error
    return rec


def tree_dot(tree: SubTree) -> str:
    """Graphviz rendering; siblings are kept left to right in creation order."""
    lines = ["digraph subcomputations {", "  node [shape=box];"]
    for n in tree.nodes:
        lines.append(f'  n{n.id} [label="{n.id}:{n.status}"];')
    for n in tree.nodes:
        for c in n.children:
            lines.append(f"  n{n.id} -> n{c};")
        if len(n.children) > 1:
            order = " -> ".join(f"n{c}" for c in n.children)
            lines.append(f"  {{ rank=same; {order} [style=invis]; }}")
    lines.append("}")
    return "\n".join(lines) + "\n"
