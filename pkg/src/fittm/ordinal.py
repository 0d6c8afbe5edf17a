"""Ordinals below epsilon_0 in Cantor normal form, plus finite order codes.

An :class:`Ordinal` is a tuple of ``(exponent, coefficient)`` terms with
strictly decreasing exponents, so structural equality is ordinal equality.
Integers are accepted wherever an ordinal is expected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterable, Mapping, Union

from .errors import CapExceeded, NotALinearOrder, OrdinalSyntaxError

MAX_DEPTH = 16
MAX_COEFF = 2**32

OrdLike = Union["Ordinal", int]


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: tuple = ()
    depth: int = field(default=0, init=False, compare=False, repr=False)

    def __post_init__(self):
        depth = 0
        prev = None
        for exp, coeff in self.terms:
            if not isinstance(exp, Ordinal):
                raise TypeError("exponents must be Ordinal instances")
            if not isinstance(coeff, int) or coeff < 1:
                raise ValueError(f"coefficient must be a positive int, got {coeff!r}")
            if coeff > MAX_COEFF:
                raise CapExceeded(f"coefficient {coeff} exceeds 2^32")
            if prev is not None and not ord_cmp(exp, prev) < 0:
                raise ValueError("exponents must be strictly decreasing")
            prev = exp
            depth = max(depth, exp.depth + 1)
        if depth > MAX_DEPTH:
            raise CapExceeded(f"exponent nesting depth {depth} exceeds {MAX_DEPTH}")
        object.__setattr__(self, "depth", depth)

    # construction helpers
    @classmethod
    def of(cls, value: OrdLike) -> "Ordinal":
        if isinstance(value, Ordinal):
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f"cannot make an ordinal from {value!r}")
        if value < 0:
            raise ValueError("ordinals are non-negative")
        return _finite(value)

    @classmethod
    def parse(cls, text: str) -> "Ordinal":
        return parse_ordinal(text)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0].is_zero)

    @property
    def is_limit(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].is_zero

    @property
    def leading_exponent(self) -> "Ordinal":
        if not self.terms:
            raise ValueError("zero has no leading exponent")
        return self.terms[0][0]

    def __int__(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    def __lt__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return ord_cmp(self, other) < 0

    def __eq__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return self.is_finite and int(self) == other
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self.is_finite:
            return hash(int(self))
        return hash(self.terms)

    def __add__(self, other):
        if isinstance(other, (Ordinal, int)) and not isinstance(other, bool):
            return ord_add(self, other)
        return NotImplemented

    def __radd__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return ord_add(other, self)
        return NotImplemented

    def __str__(self) -> str:
        return format_ordinal(self)

    def __repr__(self) -> str:
        return f"Ordinal({format_ordinal(self)!r})"


ZERO = Ordinal()
_FINITE_CACHE: dict[int, Ordinal] = {0: ZERO}


def _finite(n: int) -> Ordinal:
    o = _FINITE_CACHE.get(n)
    if o is None:
        o = Ordinal(((ZERO, n),))
        if n < 4096:
            _FINITE_CACHE[n] = o
    return o


ONE = _finite(1)


def w_pow(exponent: OrdLike, coeff: int = 1) -> Ordinal:
    """Return omega^exponent * coeff."""
    return Ordinal(((Ordinal.of(exponent), coeff),))


OMEGA = w_pow(1)


def ord_cmp(a: OrdLike, b: OrdLike) -> int:
    """Three-way comparison: -1, 0 or 1."""
    a, b = Ordinal.of(a), Ordinal.of(b)
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = ord_cmp(ea, eb)
        if c:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    la, lb = len(a.terms), len(b.terms)
    return (la > lb) - (la < lb)


def ord_add(a: OrdLike, b: OrdLike) -> Ordinal:
    a, b = Ordinal.of(a), Ordinal.of(b)
    if b.is_zero:
        return a
    lead, lead_coeff = b.terms[0]
    kept = []
    for exp, coeff in a.terms:
        c = ord_cmp(exp, lead)
        if c > 0:
            kept.append((exp, coeff))
        elif c == 0:
            lead_coeff += coeff
            break
        else:
            break
    return Ordinal(tuple(kept) + ((lead, lead_coeff),) + b.terms[1:])


def ord_sub(b: OrdLike, a: OrdLike) -> Ordinal:
    """Left subtraction: the unique d with a + d = b (requires a <= b)."""
    a, b = Ordinal.of(a), Ordinal.of(b)
    for i, ((ea, ca), (eb, cb)) in enumerate(zip(a.terms, b.terms)):
        if ea == eb and ca == cb:
            continue
        c = ord_cmp(ea, eb)
        if c < 0:
            return Ordinal(b.terms[i:])
        if c == 0 and ca < cb:
            return Ordinal(((eb, cb - ca),) + b.terms[i + 1:])
        raise ValueError(f"{a} > {b}")
    if len(a.terms) > len(b.terms):
        raise ValueError(f"{a} > {b}")
    return Ordinal(b.terms[len(a.terms):])


def omega_times(d: OrdLike) -> Ordinal:
    """d * omega for d > 0, i.e. omega^(lead(d) + 1)."""
    d = Ordinal.of(d)
    if d.is_zero:
        return ZERO
    return w_pow(ord_add(d.leading_exponent, 1))


# literals

_TOKEN = re.compile(r"\s*(?:(\d+)|(w)|(\^)|(\*)|(\+)|(\()|(\)))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise OrdinalSyntaxError(f"bad character in ordinal literal {text!r} at {pos}")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise OrdinalSyntaxError(f"unexpected {tok!r} in {self.text!r}")
        self.i += 1
        return tok

    def sum(self) -> Ordinal:
        terms = [self.term()]
        while self.peek() == "+":
            self.take()
            terms.append(self.term())
        for (e1, _), (e2, _) in zip(terms, terms[1:]):
            if ord_cmp(e2, e1) >= 0:
                raise OrdinalSyntaxError(f"{self.text!r} is not in Cantor normal form")
        if len(terms) == 1 and terms[0][1] == 0 and terms[0][0].is_zero:
            return ZERO
        if any(c == 0 for _, c in terms):
            raise OrdinalSyntaxError(f"zero coefficient in {self.text!r}")
        return Ordinal(tuple(terms))

    def term(self):
        tok = self.peek()
        if tok is not None and tok.isdigit():
            return (ZERO, int(self.take()))
        exp = self.power()
        coeff = 1
        if self.peek() == "*":
            self.take()
            tok = self.take()
            if not tok.isdigit():
                raise OrdinalSyntaxError(f"coefficient must be an integer in {self.text!r}")
            coeff = int(tok)
        return (exp, coeff)

    def power(self) -> Ordinal:
        self.take("w")
        if self.peek() != "^":
            return ONE
        self.take()
        return self.exponent()

    def exponent(self) -> Ordinal:
        tok = self.peek()
        if tok == "(":
            self.take()
            inner = self.sum()
            self.take(")")
            return inner
        if tok is not None and tok.isdigit():
            return Ordinal.of(int(self.take()))
        return w_pow(self.power())


def parse_ordinal(text: str) -> Ordinal:
    """Parse ``0``, ``w``, ``w^2*3+w*2+5``, ``w^w^2``, ``w^(w+1)``."""
    p = _Parser(text)
    if not p.toks:
        raise OrdinalSyntaxError("empty ordinal literal")
    try:
        result = p.sum()
    except (ValueError, TypeError) as exc:
        if isinstance(exc, (OrdinalSyntaxError, CapExceeded)):
            raise
        raise OrdinalSyntaxError(f"{text!r}: {exc}") from exc
    if p.peek() is not None:
        raise OrdinalSyntaxError(f"trailing input in {text!r}")
    return result


def format_ordinal(a: OrdLike) -> str:
    a = Ordinal.of(a)
    if a.is_zero:
        return "0"
    parts = []
    for exp, coeff in a.terms:
        if exp.is_zero:
            parts.append(str(coeff))
            continue
        if exp == 1:
            base = "w"
        elif exp.is_finite or exp == OMEGA:
            base = f"w^{exp}"
        else:
            base = f"w^({exp})"
        parts.append(base if coeff == 1 else f"{base}*{coeff}")
    return "+".join(parts)


# finite order codes


@dataclass(frozen=True)
class OrdinalCode:
    """A finite strict linear order; element ``x`` stands for omega^blocks[x] points.

    Plain elements (absent from ``blocks``) are single points, so a code
    without blocks decodes to a natural number.
    """

    domain: frozenset
    pairs: frozenset
    blocks: Mapping = field(default_factory=dict)

    def __hash__(self):
        return hash((self.domain, self.pairs, tuple(sorted(self.blocks.items()))))

    @classmethod
    def from_sequence(cls, elements: Iterable[int], blocks: Mapping | None = None) -> "OrdinalCode":
        """Code listing ``elements`` in increasing order."""
        elems = list(elements)
        pairs = {(elems[i], elems[j]) for i in range(len(elems)) for j in range(i + 1, len(elems))}
        return cls(frozenset(elems), frozenset(pairs), dict(blocks or {}))

    def ordered(self) -> list[int]:
        """Elements sorted by the coded order (validates linearity)."""
        dom = self.domain
        below = {x: 0 for x in dom}
        for m, n in self.pairs:
            if m not in dom or n not in dom:
                raise NotALinearOrder(f"pair {(m, n)} leaves the domain")
            if m == n:
                raise NotALinearOrder(f"reflexive pair {(m, n)}")
            if (n, m) in self.pairs:
                raise NotALinearOrder(f"symmetric pairs on {m}, {n}")
            below[n] += 1
        k = len(dom)
        if len(self.pairs) != k * (k - 1) // 2:
            raise NotALinearOrder("some elements are incomparable")
        # a total antisymmetric relation is transitive iff in-degrees are distinct
        if sorted(below.values()) != list(range(k)):
            raise NotALinearOrder("relation is not transitive")
        for x in self.blocks:
            if x not in dom:
                raise NotALinearOrder(f"block {x} outside the domain")
        return sorted(dom, key=below.__getitem__)

    def restrict(self, subset: Iterable[int]) -> "OrdinalCode":
        s = frozenset(subset) & self.domain
        return OrdinalCode(
            s,
            frozenset(p for p in self.pairs if p[0] in s and p[1] in s),
            {x: e for x, e in self.blocks.items() if x in s},
        )


def decode_ordinal(code: OrdinalCode) -> Ordinal:
    """Order type of the coded order."""
    total = ZERO
    for x in code.ordered():
        total = ord_add(total, w_pow(code.blocks.get(x, ZERO)))
    return total


def encode_ordinal(a: OrdLike, cap: int = 64) -> OrdinalCode:
    a = Ordinal.of(a)
    size = sum(c for _, c in a.terms)
    if size > cap:
        raise CapExceeded(f"{a} needs {size} code elements, cap is {cap}")
    blocks = {}
    n = 0
    for exp, coeff in a.terms:
        for _ in range(coeff):
            if not exp.is_zero:
                blocks[n] = exp
            n += 1
    return OrdinalCode.from_sequence(range(n), blocks)
