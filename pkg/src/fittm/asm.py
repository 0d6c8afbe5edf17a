"""Assembly format for machine programs.

One transition per line::

    STATE READ -> WRITE MOVE NEXT

``READ`` and ``WRITE`` carry one symbol per declared tape (``@tapes``,
default all seven roles in fixed order).  In ``READ`` a ``*`` matches both
bits; in ``WRITE`` it leaves the cell unchanged.  ``MOVE`` is ``L``, ``R`` or
``S``.  ``NEXT`` is a state, ``halt``, or ``query/YES/NO`` which enters the
query state and resumes in ``YES`` or ``NO`` according to the answer.

Pragmas: ``@name``, ``@id``, ``@tapes``, ``@doc`` and ``@total-default``
(missing read tuples become stay-in-place self loops).  ``#`` starts a comment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import BadTuple, DuplicateTransition, NonTotal, ParseError, UnknownState
from .program import (
    HALT, LIMIT, MOVE_NAMES, MOVES, QUERY, START, TAPE_ROLES, Program, Transition,
)


@dataclass(frozen=True)
class ProgramSource:
    text: str
    name: str = "anonymous"


def _expand(pattern: str):
    choices = [("0", "1") if c == "*" else (c,) for c in pattern]
    for combo in itertools.product(*choices):
        yield tuple(int(c) for c in combo)


def parse_program(src: ProgramSource | str, name: str | None = None) -> Program:
    if isinstance(src, str):
        src = ProgramSource(src, name or "anonymous")
    prog_name = src.name
    pid = None
    tapes = tuple(range(len(TAPE_ROLES)))
    total_default = False
    doc = []
    raw = []  # (line, state, read, write, move, next, answers)

    for lineno, line in enumerate(src.text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            key, _, rest = line.partition(" ")
            rest = rest.strip()
            if key == "@name":
                prog_name = rest
            elif key == "@id":
                if not rest.isdigit():
                    raise ParseError(f"bad program id {rest!r}", lineno)
                pid = int(rest)
            elif key == "@tapes":
                roles = rest.split()
                bad = [r for r in roles if r not in TAPE_ROLES]
                if bad or not roles:
                    raise ParseError(f"unknown tape roles {bad}", lineno)
                idx = [TAPE_ROLES.index(r) for r in roles]
                if idx != sorted(set(idx)):
                    raise ParseError("@tapes must list roles once, in the fixed order", lineno)
                tapes = tuple(idx)
            elif key == "@total-default":
                total_default = True
            elif key == "@doc":
                doc.append(rest)
            else:
                raise ParseError(f"unknown pragma {key}", lineno)
            continue
        lhs, arrow, rhs = line.partition("->")
        if not arrow:
            raise ParseError("expected '->'", lineno)
        left, right = lhs.split(), rhs.split()
        if len(left) != 2 or len(right) != 3:
            raise ParseError("expected 'STATE READ -> WRITE MOVE NEXT'", lineno)
        state, read = left
        write, move, nxt = right
        if state in (HALT, QUERY):
            raise ParseError(f"state {state!r} cannot have transitions", lineno)
        n = len(tapes)
        if len(read) != n or set(read) - set("01*"):
            raise BadTuple(f"read tuple {read!r} must have {n} symbols from 0/1/*", lineno)
        if len(write) != n or set(write) - set("01*"):
            raise BadTuple(f"write tuple {write!r} must have {n} symbols from 0/1/*", lineno)
        if move not in MOVES:
            raise BadTuple(f"bad move {move!r}", lineno)
        answers = None
        if nxt.startswith(QUERY):
            parts = nxt.split("/")
            if len(parts) != 3 or parts[0] != QUERY or not parts[1] or not parts[2]:
                raise BadTuple(f"query target must be query/YES/NO, got {nxt!r}", lineno)
            nxt, answers = QUERY, (parts[1], parts[2])
        raw.append((lineno, state, read, write, move, nxt, answers))

    declared = {}
    for lineno, state, *_ in raw:
        declared.setdefault(state, lineno)
    for lineno, _, _, _, _, nxt, answers in raw:
        for target in (nxt,) + (answers or ()):
            if target not in declared and target not in (HALT, QUERY):
                raise UnknownState(f"undeclared state {target!r}", lineno)
    for required in (START, LIMIT):
        if required not in declared:
            raise NonTotal(f"program has no {required!r} state")

    transitions = {}
    origin = {}
    for lineno, state, read, write, move, nxt, answers in raw:
        wtuple = tuple(None if c == "*" else int(c) for c in write)
        tr = Transition(wtuple, MOVES[move], nxt, answers)
        for bits in _expand(read):
            key = (state, bits)
            if key in transitions:
                raise DuplicateTransition(
                    f"duplicate transition for {state} on {''.join(map(str, bits))}",
                    lineno, origin[key])
            transitions[key] = tr
            origin[key] = lineno

    states = tuple(declared)
    for state in states:
        for bits in itertools.product((0, 1), repeat=len(tapes)):
            if (state, bits) not in transitions:
                if not total_default:
                    raise NonTotal(
                        f"state {state!r} has no transition on {''.join(map(str, bits))}",
                        declared[state])
                transitions[(state, bits)] = Transition((None,) * len(tapes), 0, state)
    return Program(prog_name, tapes, transitions, states, pid, total_default, "\n".join(doc))


def print_program(p: Program) -> str:
    """Render ``p`` in the assembly format (transitions fully expanded)."""
    lines = [f"@name {p.name}"]
    if p.pid is not None:
        lines.append(f"@id {p.pid}")
    lines.append("@tapes " + " ".join(TAPE_ROLES[r] for r in p.tapes))
    if p.total_default:
        lines.append("@total-default")
    for d in p.doc.splitlines():
        lines.append(f"@doc {d}")
    for state in p.states:
        for bits in itertools.product((0, 1), repeat=len(p.tapes)):
            tr = p.transitions[(state, bits)]
            write = "".join("*" if w is None else str(w) for w in tr.write)
            nxt = f"{QUERY}/{tr.answers[0]}/{tr.answers[1]}" if tr.next == QUERY else tr.next
            lines.append(f"{state} {''.join(map(str, bits))} -> {write} {MOVE_NAMES[tr.move]} {nxt}")
    return "\n".join(lines) + "\n"
