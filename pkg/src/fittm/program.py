"""Core data: tape roles, programs, snapshots, oracle calls and tape codings."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import CapExceeded, UndecodableOracleTape
from .ordinal import ZERO, Ordinal
from .tape import BLANK, TapeRep, format_tape

TAPE_ROLES = ("input", "scratch", "output", "index", "param", "ordinal", "blank")
INPUT, SCRATCH, OUTPUT, INDEX, PARAM, ORDINAL, PBLANK = range(7)
NTAPES = len(TAPE_ROLES)

START, LIMIT, HALT, QUERY = "start", "limit", "halt", "query"
RESERVED = (START, LIMIT, HALT, QUERY)

L, S, R = -1, 0, 1
MOVES = {"L": L, "S": S, "R": R}
MOVE_NAMES = {v: k for k, v in MOVES.items()}

MAX_CODE_CELLS = 4096


@dataclass(frozen=True)
class Transition:
    write: tuple  # per used tape: 0, 1 or None (leave the cell alone)
    move: int
    next: str
    answers: Optional[tuple] = None  # (yes_state, no_state) when next == QUERY


@dataclass(eq=False)
class Program:
    """A transition table over a subset of the tape roles.

    ``tapes`` lists the role indices the program reads and writes, in the
    fixed role order; read tuples have one bit per listed tape.
    """

    name: str
    tapes: tuple
    transitions: dict
    states: tuple
    pid: Optional[int] = None
    total_default: bool = False
    doc: str = ""

    def delta(self, state: str, read: tuple) -> Transition:
        return self.transitions[(state, read)]

    def structure(self):
        return (self.pid, self.tapes, self.states, tuple(sorted(self.transitions.items())))

    def __eq__(self, other):
        if not isinstance(other, Program):
            return NotImplemented
        return self.structure() == other.structure()

    def __hash__(self):
        return hash((self.name, self.pid))


@dataclass
class DriverProgram:
    """A program whose control loop is written in Python.

    ``drive(call, oracle, budgets)`` returns a Verdict and may consult
    ``oracle`` like a machine entering its query state.  Used for the
    synthesized constructions whose tape-level realization would need a
    universal machine.
    """

    name: str
    drive: Callable
    pid: Optional[int] = None
    doc: str = ""


@dataclass(frozen=True)
class Snapshot:
    state: str
    head: int
    tapes: tuple
    clock: Ordinal = ZERO

    def config(self) -> tuple:
        return (self.state, self.head, self.tapes)

    def same_config(self, other: "Snapshot") -> bool:
        return self.config() == other.config()

    @property
    def output(self) -> TapeRep:
        return self.tapes[OUTPUT]

    def digest(self) -> str:
        text = repr((self.state, self.head, [format_tape(t) for t in self.tapes]))
        return hashlib.sha1(text.encode()).hexdigest()[:10]


def initial_snapshot(input_tape: TapeRep = BLANK, ordinal_tape: TapeRep = BLANK,
                     blank_tape: TapeRep = BLANK) -> Snapshot:
    tapes = [BLANK] * NTAPES
    tapes[INPUT] = input_tape
    tapes[ORDINAL] = ordinal_tape
    tapes[PBLANK] = blank_tape
    return Snapshot(START, 0, tuple(tapes), ZERO)


@dataclass(frozen=True)
class OracleCall:
    """A computation call: program index, parameter, optional ordinal.

    ``instance`` is the integer substituted on the blank tape by a parallel
    call; ``resume``/``stop`` describe a continuation call that starts from a
    snapshot and halts when the named event happens.
    """

    index: int
    parameter: TapeRep = BLANK
    ordinal: Optional[Ordinal] = None
    instance: Optional[int] = None
    resume: Optional[Snapshot] = field(default=None, compare=True)
    stop: Optional[str] = None

    def label(self) -> str:
        parts = [f"e={self.index}", f"x={format_tape(self.parameter)}"]
        if self.ordinal is not None:
            parts.append(f"a={self.ordinal}")
        if self.instance is not None:
            parts.append(f"n={self.instance}")
        if self.resume is not None:
            parts.append(f"from={self.resume.clock}#{self.resume.digest()}")
        if self.stop is not None:
            parts.append(f"until={self.stop}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.label()


# tape codings


def encode_natural(n: int) -> list[int]:
    """Self-delimiting binary: each bit (LSB first) as ``1b``, then ``00``."""
    if n < 0:
        raise ValueError("naturals only")
    bits = []
    while n:
        bits += [1, n & 1]
        n >>= 1
    return bits + [0, 0]


def decode_natural(t: TapeRep, what: str = "index") -> int:
    value, shift, pos = 0, 0, 0
    while pos < MAX_CODE_CELLS:
        marker, bit = t.read(pos), t.read(pos + 1)
        if marker == 0:
            if bit != 0:
                raise UndecodableOracleTape(f"{what} tape: stray bit at cell {pos + 1}")
            return value
        value |= bit << shift
        shift += 1
        pos += 2
    raise UndecodableOracleTape(f"{what} tape has no terminator")


def encode_ordinal_tape(a) -> list[int]:
    """Term list coding: per term ``1 <exp> 1^coeff 0``, closed by ``0``."""
    a = Ordinal.of(a)
    out = []
    for exp, coeff in a.terms:
        out += [1] + encode_ordinal_tape(exp) + [1] * coeff + [0]
    return out + [0]


def _decode_ord(t: TapeRep, pos: int, depth: int):
    if depth > 16:
        raise CapExceeded("ordinal tape nests too deeply")
    terms = []
    while True:
        if pos >= MAX_CODE_CELLS:
            raise UndecodableOracleTape("ordinal tape has no terminator")
        if t.read(pos) == 0:
            pos += 1
            break
        exp, pos = _decode_ord(t, pos + 1, depth + 1)
        coeff = 0
        while t.read(pos) == 1:
            coeff += 1
            pos += 1
            if pos >= MAX_CODE_CELLS:
                raise UndecodableOracleTape("ordinal coefficient never ends")
        pos += 1
        if coeff:
            terms.append((exp, coeff))
    for (e1, _), (e2, _) in zip(terms, terms[1:]):
        if not e2 < e1:
            raise UndecodableOracleTape("ordinal tape is not in Cantor normal form")
    try:
        return Ordinal(tuple(terms)), pos
    except ValueError as exc:
        if isinstance(exc, CapExceeded):
            raise
        raise UndecodableOracleTape(str(exc)) from exc


def decode_ordinal_tape(t: TapeRep) -> Ordinal:
    return _decode_ord(t, 0, 0)[0]
