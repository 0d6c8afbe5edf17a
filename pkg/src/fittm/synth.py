"""Program builder and the generator for the shipped corpus.

``python3 -m fittm.synth DIR`` regenerates the corpus files.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from .asm import parse_program
from .ordinal import parse_ordinal
from .program import (
    HALT, LIMIT, QUERY, START, TAPE_ROLES, Program, encode_natural, encode_ordinal_tape,
)


class Builder:
    """Accumulates assembly lines over a fixed list of tape roles."""

    def __init__(self, name: str, roles, pid: int | None = None, doc: str = ""):
        self.name = name
        self.roles = tuple(sorted(roles, key=TAPE_ROLES.index))
        self.pid = pid
        self.doc = doc
        self.lines: list[str] = []
        self.defined: set[str] = set()
        self._n = 0

    def fresh(self, prefix: str = "q") -> str:
        self._n += 1
        return f"{prefix}{self._n}"

    def _tuple(self, bits: dict | None) -> str:
        bits = bits or {}
        bad = set(bits) - set(self.roles)
        if bad:
            raise KeyError(f"roles {sorted(bad)} not declared")
        return "".join(str(bits[r]) if r in bits else "*" for r in self.roles)

    def on(self, state: str, read: dict | None = None, write: dict | None = None,
           move: str = "S", nxt: str = HALT) -> "Builder":
        self.lines.append(f"{state} {self._tuple(read)} -> {self._tuple(write)} {move} {nxt}")
        self.defined.add(state)
        return self

    def write_cells(self, state: str, cells: list, then: str) -> "Builder":
        """From head 0 in ``state``: write ``cells[i]`` (a role->bit dict) at
        cell i, return the head to 0 and continue in ``then``."""
        n = len(cells)
        names = [state] + [self.fresh("w") for _ in range(n - 1)]
        back = [self.fresh("b") for _ in range(n - 1)]
        for i, cell in enumerate(cells):
            if i < n - 1:
                self.on(names[i], write=cell, move="R", nxt=names[i + 1])
            else:
                self.on(names[i], write=cell, move="L" if back else "S",
                        nxt=back[0] if back else then)
        for k, b in enumerate(back):
            self.on(b, move="L", nxt=back[k + 1] if k + 1 < len(back) else then)
        return self

    def text(self) -> str:
        head = [f"@name {self.name}"]
        if self.pid is not None:
            head.append(f"@id {self.pid}")
        head.append("@tapes " + " ".join(self.roles))
        for d in self.doc.splitlines():
            head.append(f"@doc {d}")
        body = list(self.lines)
        if LIMIT not in self.defined:
            body.append(f"{LIMIT} {self._tuple(None)} -> {self._tuple(None)} S {LIMIT}")
        return "\n".join(head + body) + "\n"

    def build(self) -> Program:
        return parse_program(self.text(), self.name)


def query(yes: str, no: str) -> str:
    return f"{QUERY}/{yes}/{no}"


def index_cells(e: int) -> list[dict]:
    return [{"index": b} for b in encode_natural(e)]


def merge_cells(*columns: list[dict]) -> list[dict]:
    n = max(len(c) for c in columns)
    out = [{} for _ in range(n)]
    for col in columns:
        for i, cell in enumerate(col):
            out[i].update(cell)
    return out


# corpus programs


def halt_writer(pid=0) -> Builder:
    b = Builder("halt_writer", ["output"], pid, "writes 101 in three steps and halts")
    b.on(START, write={"output": 1}, move="R", nxt="a")
    b.on("a", write={"output": 0}, move="R", nxt="c")
    b.on("c", write={"output": 1}, move="S", nxt=HALT)
    return b


def idle_diverger(pid=1) -> Builder:
    b = Builder("idle_diverger", ["output"], pid, "marks output cell 0, then idles; idles at limits too")
    b.on(START, write={"output": 1}, nxt="spin")
    b.on("spin", nxt="spin")
    b.on(LIMIT, nxt=LIMIT)
    return b


def flip_escape(pid=2) -> Builder:
    b = Builder("flip_escape", ["scratch", "output"], pid,
                "flips scratch cell 0 forever; stage 0 recurs at stage 2\n"
                "but the limit sees cell 0 set and halts")
    b.on(START, write={"scratch": 1}, nxt="s1")
    b.on("s1", write={"scratch": 0}, nxt=START)
    b.on(LIMIT, read={"scratch": 1}, write={"output": 1}, nxt=HALT)
    b.on(LIMIT, read={"scratch": 0}, nxt=HALT)
    return b


def right_sweeper(pid=3) -> Builder:
    b = Builder("right_sweeper", ["scratch"], pid, "writes 1 and moves right, at every stage")
    b.on(START, write={"scratch": 1}, move="R", nxt=START)
    b.on(LIMIT, write={"scratch": 1}, move="R", nxt=LIMIT)
    return b


def self_call(pid=4) -> Builder:
    b = Builder("self_call", ["index"], pid, "asks about itself on its own (blank) input")
    b.write_cells(START, index_cells(pid), query(HALT, HALT))
    return b


def ask_halter(pid=5) -> Builder:
    b = Builder("ask_halter", ["output"], pid,
                "asks whether program 0 converges; halts with output 1 on yes, spins on no")
    b.on(START, nxt=query("yes", "spin"))
    b.on("yes", write={"output": 1}, nxt=HALT)
    b.on("spin", nxt="spin")
    return b


def ask_idle(pid=6) -> Builder:
    b = Builder("ask_idle", ["output", "index"], pid,
                "asks whether program 1 converges; halts with output 1 iff the answer is no")
    b.write_cells(START, index_cells(1), query("spin", "no"))
    b.on("no", write={"output": 1}, nxt=HALT)
    b.on("spin", nxt="spin")
    return b


def chain(pid=7) -> Builder:
    b = Builder("chain", ["index", "ordinal", "blank"], pid,
                "ordinal chain: reads its own ordinal from the blank tape; passes 3\n"
                "when it is infinite, one less when finite, and halts at 0")
    b.on(START, read={"blank": 0}, nxt=HALT)
    b.on(START, read={"blank": 1}, write={"ordinal": 1}, move="R", nxt="c1")
    b.on("c1", read={"blank": 1}, move="L", nxt="big")
    b.on("c1", read={"blank": 0}, move="R", nxt="c2")
    b.on("c2", read={"blank": 0}, nxt=HALT)
    b.on("c2", read={"blank": 1}, nxt="copy")
    b.on("copy", read={"blank": 1}, write={"ordinal": 1}, move="R", nxt="copy")
    b.on("copy", read={"blank": 0}, move="L", nxt="erase")
    b.on("erase", write={"ordinal": 0}, move="L", nxt="back")
    b.on("back", read={"ordinal": 1}, move="L", nxt="back")
    b.on("back", read={"ordinal": 0}, move="L", nxt="home")
    b.write_cells("big", [{"ordinal": v} for v in encode_ordinal_tape(3)], "home")
    b.write_cells("home", index_cells(pid), query("done", "done"))
    b.on("done", nxt=HALT)
    return b


def bad_ordinal(pid=8) -> Builder:
    b = Builder("bad_ordinal", ["ordinal"], pid, "writes 1 on its ordinal tape and asks about program 0")
    b.write_cells(START, [{"ordinal": v} for v in encode_ordinal_tape(1)], query(HALT, HALT))
    return b


def child_queries(pid=9) -> Builder:
    b = Builder("child_queries", ["index"], pid, "asks about program 5, which itself asks a question")
    b.write_cells(START, index_cells(5), query(HALT, HALT))
    return b


def par_seven(pid=10) -> Builder:
    b = Builder("par_seven", ["output", "blank"], pid, "halts iff the blank tape holds the code of 7")
    code = encode_natural(7)
    names = [START] + [f"c{i}" for i in range(1, len(code))]
    for i, bit in enumerate(code):
        ok = names[i + 1] if i + 1 < len(code) else "yes"
        b.on(names[i], read={"blank": bit}, move="R" if i + 1 < len(code) else "S", nxt=ok)
        b.on(names[i], read={"blank": 1 - bit}, nxt="spin")
    b.on("yes", write={"output": 1}, nxt=HALT)
    b.on("spin", nxt="spin")
    return b


def par_freeze(pid=11) -> Builder:
    b = Builder("par_freeze", ["index", "blank"], pid,
                "with 0 on the blank tape asks about itself, otherwise spins")
    b.on(START, read={"blank": 1}, nxt="spin")
    b.on("spin", nxt="spin")
    b.on(START, read={"blank": 0}, nxt="ask")
    b.write_cells("ask", index_cells(pid), query(HALT, HALT))
    return b


def par_never(pid=12) -> Builder:
    b = Builder("par_never", ["blank"], pid, "spins whatever the blank tape holds")
    b.on(START, nxt="spin")
    b.on("spin", nxt="spin")
    return b


def loop_caller(pid=13) -> Builder:
    b = Builder("loop_caller", ["scratch"], pid,
                "asks about program 0 over and over, also at limits")
    b.on(START, nxt=query(START, START))
    b.on(LIMIT, nxt=query(LIMIT, LIMIT))
    return b


def counter_caller(pid=14) -> Builder:
    b = Builder("counter_caller", ["scratch", "output"], pid,
                "marks one more scratch cell between identical calls; halts at the limit")
    b.on(START, write={"scratch": 1}, move="R", nxt=query(START, START))
    b.on(LIMIT, write={"output": 1}, nxt=HALT)
    return b


def iitm_root(pid=15) -> Builder:
    b = Builder("iitm_root", ["index", "ordinal"], pid,
                "writes w*2 on its ordinal tape and asks about the chain program")
    alpha = encode_ordinal_tape(parse_ordinal("w*2"))
    b.write_cells(START, merge_cells(index_cells(7), [{"ordinal": v} for v in alpha]),
                  query(HALT, HALT))
    return b


def two_change(pid=16) -> Builder:
    b = Builder("two_change", ["scratch"], pid,
                "fills the scratch tape, then at limits clears and restores every\n"
                "even cell once per pass")
    b.on(START, write={"scratch": 1}, move="R", nxt=START)
    b.on(LIMIT, write={"scratch": 0}, move="R", nxt="b")
    b.on("b", move="L", nxt="c")
    b.on("c", write={"scratch": 1}, move="R", nxt="d")
    b.on("d", move="R", nxt="a")
    b.on("a", write={"scratch": 0}, move="R", nxt="b")
    return b


def flip_loop(pid=17) -> Builder:
    b = Builder("flip_loop", ["scratch"], pid,
                "flips scratch cell 0 forever; the limit clears it and starts over")
    b.on(START, write={"scratch": 1}, nxt="s1")
    b.on("s1", write={"scratch": 0}, nxt=START)
    b.on(LIMIT, write={"scratch": 0}, nxt=START)
    return b


def slow_writer(pid=18) -> Builder:
    b = Builder("slow_writer", ["scratch", "output"], pid,
                "sets output cell 0 at the first limit and output cell 1 at the\n"
                "second, then idles")
    b.on(START, nxt=START)
    b.on(LIMIT, read={"scratch": 0}, write={"scratch": 1, "output": 1}, nxt="idle")
    b.on(LIMIT, read={"scratch": 1}, move="R", nxt="mark")
    b.on("mark", write={"output": 1}, nxt="idle")
    b.on("idle", nxt="idle")
    return b


def blinker(pid=19) -> Builder:
    b = Builder("blinker", ["output"], pid, "flips output cell 0 at every limit, idles in between")
    b.on(START, nxt=START)
    b.on(LIMIT, read={"output": 0}, write={"output": 1}, nxt="idle")
    b.on(LIMIT, read={"output": 1}, write={"output": 0}, nxt="idle")
    b.on("idle", nxt="idle")
    return b


def two_phase(pid=20) -> Builder:
    b = Builder("two_phase", ["scratch"], pid,
                "flips scratch cell 0 at every limit; loops with period w*2")
    b.on(START, nxt=START)
    b.on(LIMIT, read={"scratch": 0}, write={"scratch": 1}, nxt="idle")
    b.on(LIMIT, read={"scratch": 1}, write={"scratch": 0}, nxt="idle")
    b.on("idle", nxt="idle")
    return b


def counter(width: int, pid: int) -> Builder:
    b = Builder(f"counter_{width}", ["scratch", "output"], pid,
                f"binary counter on scratch cells 1..{width}, halts on overflow")
    marks = [{"output": 1}] + [{} for _ in range(width)] + [{"output": 1}]
    b.write_cells(START, marks, "go")
    b.on("go", move="R", nxt="inc")
    b.on("inc", read={"output": 1}, nxt=HALT)
    b.on("inc", read={"scratch": 1, "output": 0}, write={"scratch": 0}, move="R", nxt="inc")
    b.on("inc", read={"scratch": 0, "output": 0}, write={"scratch": 1}, move="L", nxt="back")
    b.on("back", read={"output": 0}, move="L", nxt="back")
    b.on("back", read={"output": 1}, move="R", nxt="inc")
    return b


def bouncer(n: int, pid: int) -> Builder:
    b = Builder(f"bouncer_{n}", ["scratch", "output"], pid,
                f"writes {n} scratch ones, then erases them walking back while\n"
                f"writing ones on the output")
    out = [f"o{i}" for i in range(n)]
    back = [f"e{i}" for i in range(n)]
    names = [START] + out[1:]
    for i in range(n):
        b.on(names[i], write={"scratch": 1}, move="R" if i < n - 1 else "S",
             nxt=names[i + 1] if i < n - 1 else back[0])
    for i in range(n):
        b.on(back[i], write={"scratch": 0, "output": 1}, move="L",
             nxt=back[i + 1] if i < n - 1 else HALT)
    return b


COUNTER_WIDTHS = range(1, 13)
BOUNCER_SIZES = (3, 5, 8, 13, 21, 34, 55)


def corpus_builders() -> list[Builder]:
    out = [halt_writer(), idle_diverger(), flip_escape(), right_sweeper(), self_call(),
           ask_halter(), ask_idle(), chain(), bad_ordinal(), child_queries(), par_seven(),
           par_freeze(), par_never(), loop_caller(), counter_caller(), iitm_root(),
           two_change(), flip_loop(), slow_writer(), blinker(), two_phase()]
    out += [counter(w, 20 + w) for w in COUNTER_WIDTHS]
    out += [bouncer(n, 40 + i) for i, n in enumerate(BOUNCER_SIZES)]
    return out


UNIVERSES = {
    "universe_basic.txt": ["h: halt_writer", "d: idle_diverger", "s: self_call"],
    "universe_query.txt": ["h: halt_writer", "g: ask_halter"],
    "universe_self.txt": ["s: self_call"],
    "universe_mixed.txt": [
        "h: halt_writer", "d: idle_diverger", "s: self_call", "g: ask_halter",
        "i: ask_idle", "c: child_queries", "l: loop_caller", "k: counter_caller",
        "f: par_freeze", "r: right_sweeper", "x: flip_escape", "p: flip_loop",
        "h1: halt_writer 1", "d1: idle_diverger 1",
    ],
}


# verdict of ``fittm run NAME`` under the default budgets
EXPECTED = {
    "halt_writer": "Converges", "idle_diverger": "Diverges", "flip_escape": "Converges",
    "right_sweeper": "Diverges", "self_call": "Freezes", "ask_halter": "Converges",
    "ask_idle": "Converges", "chain": "Converges", "bad_ordinal": "Converges",
    "child_queries": "Converges", "par_seven": "Diverges", "par_freeze": "Freezes",
    "par_never": "Diverges", "loop_caller": "Diverges", "counter_caller": "Converges",
    "iitm_root": "Converges", "two_change": "Diverges", "flip_loop": "Diverges",
    "slow_writer": "Diverges", "blinker": "Diverges", "two_phase": "Diverges",
    **{f"counter_{w}": "Converges" for w in COUNTER_WIDTHS},
    **{f"bouncer_{n}": "Converges" for n in BOUNCER_SIZES},
}


# synthesized programs


def flip_program(e: int, name: str | None = None) -> Builder:
    """Asks whether e converges on this program's input; diverges on yes, halts on no."""
    b = Builder(name or f"flip_{e}", ["input", "index", "param"], None,
                f"asks about program {e} on the same input; diverges on yes, halts on no")
    cells = index_cells(e)
    b.write_cells(START, cells, "copy")
    # the copy sweep never ends; the parameter is complete at the first limit
    for bit in (0, 1):
        b.on("copy", read={"input": bit}, write={"param": bit}, move="R", nxt="copy")
    b.on(LIMIT, nxt=query("spin", HALT))
    b.on("spin", nxt="spin")
    return b


def write_corpus(directory: Path) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for b in corpus_builders():
        path = directory / f"{b.name}.fit"
        path.write_text(b.text())
        paths.append(path)
    for fname, lines in UNIVERSES.items():
        path = directory / fname
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    path = directory / "expected.txt"
    path.write_text("".join(f"{name} {v}\n" for name, v in EXPECTED.items()))
    paths.append(path)
    return paths


def main(argv=None):
    ap = argparse.ArgumentParser(description="regenerate the program corpus")
    ap.add_argument("directory", type=Path)
    args = ap.parse_args(argv)
    for p in write_corpus(args.directory):
        print(p)


if __name__ == "__main__":
    main()
