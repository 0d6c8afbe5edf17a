"""Run-length encoded binary tapes with an eventually constant tail."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence


def _normalize(runs: Iterable[tuple[int, int]], tail: int) -> tuple:
    out: list[list[int]] = []
    for bit, length in runs:
        if length <= 0:
            continue
        if out and out[-1][0] == bit:
            out[-1][1] += length
        else:
            out.append([bit, length])
    while out and out[-1][0] == tail:
        out.pop()
    return tuple((b, n) for b, n in out)


@dataclass(frozen=True)
class TapeRep:
    """Cells ``0..`` given by ``runs`` followed by ``tail`` forever.

    Runs are kept in normal form (adjacent runs differ, the last run differs
    from the tail), so two tapes are equal as functions iff they are equal
    structurally.
    """

    runs: tuple = ()
    tail: int = 0

    def __post_init__(self):
        if self.tail not in (0, 1):
            raise ValueError("tail must be a bit")
        norm = _normalize(self.runs, self.tail)
        if norm != self.runs:
            object.__setattr__(self, "runs", norm)

    @classmethod
    def blank(cls) -> "TapeRep":
        return BLANK

    @classmethod
    def from_bits(cls, bits: Sequence[int] | str, tail: int = 0) -> "TapeRep":
        if isinstance(bits, str):
            bits = [int(c) for c in bits if not c.isspace()]
        return cls(tuple((int(b), 1) for b in bits), tail)

    @property
    def extent(self) -> int:
        """Index of the first cell of the constant tail."""
        return sum(n for _, n in self.runs)

    def bits(self, length: int | None = None) -> list[int]:
        n = self.extent if length is None else length
        out: list[int] = []
        for bit, run in self.runs:
            out.extend([bit] * run)
            if len(out) >= n:
                return out[:n]
        out.extend([self.tail] * (n - len(out)))
        return out

    def read(self, i: int) -> int:
        pos = 0
        for bit, run in self.runs:
            pos += run
            if i < pos:
                return bit
        return self.tail

    def write(self, i: int, b: int) -> "TapeRep":
        if self.read(i) == b:
            return self
        new: list[tuple[int, int]] = []
        pos = 0
        placed = False
        for bit, run in self.runs:
            if not placed and pos <= i < pos + run:
                new.append((bit, i - pos))
                new.append((b, 1))
                new.append((bit, pos + run - i - 1))
                placed = True
            else:
                new.append((bit, run))
            pos += run
        if not placed:
            new.append((self.tail, i - pos))
            new.append((b, 1))
        return TapeRep(_normalize(new, self.tail), self.tail)

    def suffix(self, start: int) -> "TapeRep":
        """The tape ``j -> self[start + j]``."""
        if start <= 0:
            return self
        new = []
        pos = 0
        for bit, run in self.runs:
            end = pos + run
            if end > start:
                new.append((bit, end - max(pos, start)))
            pos = end
        return TapeRep(_normalize(new, self.tail), self.tail)

    def prefix(self, n: int, fill: "TapeRep | None" = None) -> "TapeRep":
        """First ``n`` cells of self, continued by ``fill`` (blank by default)."""
        fill = fill or BLANK
        return TapeRep.from_bits(self.bits(n) + fill.bits(), fill.tail)

    def ones(self) -> int:
        return sum(n for b, n in self.runs if b)

    def __or__(self, other: "TapeRep") -> "TapeRep":
        n = max(self.extent, other.extent)
        a, b = self.bits(n), other.bits(n)
        return TapeRep.from_bits([x | y for x, y in zip(a, b)], self.tail | other.tail)

    def __str__(self) -> str:
        return format_tape(self)


BLANK = TapeRep()

_RUN = re.compile(r"^([01])\^(\d+)$")


def format_tape(t: TapeRep) -> str:
    """Trace serialization, e.g. ``0^5 1^1 | tail 0``."""
    body = " ".join(f"{b}^{n}" for b, n in t.runs)
    return f"{body} | tail {t.tail}" if body else f"| tail {t.tail}"


def parse_tape(text: str) -> TapeRep:
    """Inverse of :func:`format_tape`; a bare bit string like ``0110`` is also accepted."""
    text = text.strip()
    if "|" not in text:
        if text and set(text) <= {"0", "1"}:
            return TapeRep.from_bits(text)
        if not text:
            return BLANK
        raise ValueError(f"bad tape literal {text!r}")
    body, _, tail_part = text.partition("|")
    tail_part = tail_part.strip()
    if not tail_part.startswith("tail") or tail_part.split()[-1] not in ("0", "1"):
        raise ValueError(f"bad tape tail in {text!r}")
    runs = []
    for tok in body.split():
        m = _RUN.match(tok)
        if not m:
            raise ValueError(f"bad run {tok!r}")
        runs.append((int(m.group(1)), int(m.group(2))))
    return TapeRep(tuple(runs), int(tail_part.split()[-1]))


def tape_read(t: TapeRep, i: int) -> int:
    return t.read(i)


def tape_write(t: TapeRep, i: int, b: int) -> TapeRep:
    return t.write(i, b)


def tape_shift_equal(t1: TapeRep, h1: int, t2: TapeRep, h2: int, behind: int | None = None):
    """Return the shift ``h2 - h1`` if the tapes agree around the heads, else None.

    Cells from ``behind`` positions before each head onward must agree; by
    default the whole shorter prefix before the heads is compared.
    """
    if behind is None:
        behind = min(h1, h2)
    if behind > min(h1, h2):
        return None
    if t1.suffix(h1 - behind) != t2.suffix(h2 - behind):
        return None
    return h2 - h1
