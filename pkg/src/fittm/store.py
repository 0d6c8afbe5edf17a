"""Program store and corpus loading."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterator, Union

from .asm import ProgramSource, parse_program
from .errors import ParseError, UnknownProgram
from .program import DriverProgram, OracleCall, Program
from .tape import BLANK, parse_tape

SYNTH_BASE = 1000

AnyProgram = Union[Program, DriverProgram]


def corpus_dir() -> Path:
    env = os.environ.get("TITTM_CORPUS")
    if env:
        return Path(env)
    return Path(__file__).with_name("corpus")


class ProgramStore:
    """Programs by id; synthesized programs get ids from 1000 upwards."""

    def __init__(self):
        self._by_id: dict[int, AnyProgram] = {}
        self._by_name: dict[str, int] = {}
        self._next = SYNTH_BASE

    def add(self, p: AnyProgram, pid: int | None = None) -> int:
        pid = pid if pid is not None else p.pid
        if pid is None:
            while self._next in self._by_id:
                self._next += 1
            pid = self._next
        if pid in self._by_id and self._by_id[pid] is not p:
            raise ValueError(f"program id {pid} already taken by {self._by_id[pid].name}")
        p.pid = pid
        self._by_id[pid] = p
        self._by_name.setdefault(p.name, pid)
        return pid

    def get(self, pid: int) -> AnyProgram:
        try:
            return self._by_id[pid]
        except KeyError:
            raise UnknownProgram(f"no program with id {pid}") from None

    def __contains__(self, pid) -> bool:
        return pid in self._by_id

    def id_of(self, name: str) -> int:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownProgram(f"no program named {name!r}") from None

    def by_name(self, name: str) -> AnyProgram:
        return self.get(self.id_of(name))

    def ids(self) -> list[int]:
        return sorted(self._by_id)

    def __iter__(self) -> Iterator[AnyProgram]:
        return (self._by_id[i] for i in self.ids())

    def __len__(self) -> int:
        return len(self._by_id)

    def resolve(self, ref: str) -> int:
        """An id, a program name, or a path to a ``.fit`` file (loaded if new)."""
        if ref.isdigit():
            self.get(int(ref))
            return int(ref)
        if ref in self._by_name:
            return self._by_name[ref]
        path = Path(ref)
        if path.suffix == ".fit" or path.exists():
            p = load_file(path)
            if p.pid is not None and p.pid in self._by_id and self._by_id[p.pid] == p:
                return p.pid
            if p.pid is not None and p.pid in self._by_id:
                p.pid = None
            return self.add(p)
        raise UnknownProgram(f"no program {ref!r}")


def load_file(path: Path) -> Program:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise UnknownProgram(f"no such program file {path}") from None
    return parse_program(ProgramSource(text, path.stem))


def load_corpus(directory: Path | None = None) -> ProgramStore:
    directory = Path(directory) if directory else corpus_dir()
    store = ProgramStore()
    files = sorted(directory.glob("*.fit"))
    # files with explicit ids first so that id-less ones cannot collide
    programs = [load_file(f) for f in files]
    for p in sorted(programs, key=lambda q: q.pid is None):
        store.add(p)
    return store


def parse_universe(text: str, store: ProgramStore) -> dict[str, OracleCall]:
    """Lines ``[LABEL:] PROGRAM [PARAM]``; the label defaults to the program name."""
    calls: dict[str, OracleCall] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        label = None
        if toks[0].endswith(":"):
            label, toks = toks[0][:-1], toks[1:]
        if not toks or len(toks) > 2:
            raise ParseError("expected '[LABEL:] PROGRAM [PARAM]'", lineno)
        try:
            pid = store.resolve(toks[0])
            param = parse_tape(toks[1]) if len(toks) > 1 else BLANK
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        label = label or toks[0] + (f"({toks[1]})" if len(toks) > 1 else "")
        if label in calls:
            raise ParseError(f"duplicate label {label!r}", lineno)
        calls[label] = OracleCall(pid, param)
    return calls


def load_universe(path: Path, store: ProgramStore) -> dict[str, OracleCall]:
    return parse_universe(Path(path).read_text(), store)
