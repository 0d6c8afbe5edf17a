"""Budgets and the four-valued verdict."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from .ordinal import Ordinal, format_ordinal, parse_ordinal, w_pow
from .tape import TapeRep

STEP_BUDGET = "step_budget"
DEPTH_BUDGET = "depth_budget"
CLOCK_CAP = "clock_cap"
LIMIT_BUDGET = "limit_budget"
UNREPRESENTABLE = "unrepresentable"
MACHINE_ERROR = "machine_error"


@dataclass(frozen=True)
class Budgets:
    max_steps_per_block: int = 100_000
    max_limit_stages: int = 64
    max_depth: int = 32
    clock_cap: Ordinal = field(default_factory=lambda: w_pow(8))
    max_parallel: int = 16
    max_lfp_iters: int = 64
    max_calls: int = 256
    max_nodes: int = 4096

    def __post_init__(self):
        for name in ("max_steps_per_block", "max_limit_stages", "max_depth", "max_parallel",
                     "max_lfp_iters", "max_calls", "max_nodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not isinstance(self.clock_cap, Ordinal):
            object.__setattr__(self, "clock_cap", Ordinal.of(self.clock_cap))
        if self.clock_cap.is_zero:
            raise ValueError("clock_cap must be positive")

    def scaled(self, factor: float) -> "Budgets":
        """Shrink or grow the numeric budgets (never below 1); the clock cap is kept."""
        def s(v):
            return max(1, int(v * factor))
        return replace(
            self,
            max_steps_per_block=s(self.max_steps_per_block),
            max_limit_stages=s(self.max_limit_stages),
            max_depth=s(self.max_depth),
            max_calls=s(self.max_calls),
            max_nodes=s(self.max_nodes),
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["clock_cap"] = format_ordinal(self.clock_cap)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Budgets":
        d = dict(d)
        if isinstance(d.get("clock_cap"), str):
            d["clock_cap"] = parse_ordinal(d["clock_cap"])
        return cls(**d)


@dataclass(frozen=True)
class Verdict:
    """One of Converges / Diverges / Freezes / Unknown.

    ``output`` is set for Converges, ``witness`` (a tuple of calls) for
    Freezes, ``reason`` for Unknown.  ``clock`` is the stage at which the
    verdict was reached, ``loop`` the divergence certificate data when known.
    """

    kind: str
    output: Optional[TapeRep] = None
    witness: tuple = ()
    reason: Optional[str] = None
    clock: Optional[Ordinal] = None
    detail: str = ""
    loop: Optional[object] = field(default=None, compare=False, repr=False)
    final: Optional[object] = field(default=None, compare=False, repr=False)

    @property
    def decided(self) -> bool:
        return self.kind in (CONVERGES, DIVERGES)

    def same_class(self, other: "Verdict") -> bool:
        return self.kind == other.kind

    def __str__(self) -> str:
        if self.kind == CONVERGES:
            return f"Converges({self.output})"
        if self.kind == FREEZES:
            return f"Freezes(depth {len(self.witness)})"
        if self.kind == UNKNOWN:
            return f"Unknown({self.reason})"
        return self.kind


CONVERGES, DIVERGES, FREEZES, UNKNOWN = "Converges", "Diverges", "Freezes", "Unknown"


def converges(output, clock=None, **kw) -> Verdict:
    return Verdict(CONVERGES, output=output, clock=clock, **kw)


def diverges(clock=None, **kw) -> Verdict:
    return Verdict(DIVERGES, clock=clock, **kw)


def freezes(witness, clock=None, **kw) -> Verdict:
    return Verdict(FREEZES, witness=tuple(witness), clock=clock, **kw)


def unknown(reason, clock=None, detail="", **kw) -> Verdict:
    return Verdict(UNKNOWN, reason=reason, clock=clock, detail=detail, **kw)
