"""Exception hierarchy shared by every module of the simulator."""

from __future__ import annotations


class FittmError(Exception):
    """Base class for all simulator errors."""


class CapExceeded(FittmError, ArithmeticError):
    """An ordinal or code outgrew the representation cap."""


class NotALinearOrder(FittmError, ValueError):
    pass


class OrdinalSyntaxError(FittmError, ValueError):
    """An ordinal literal is malformed or not in Cantor normal form."""


class UndecodableOracleTape(FittmError):
    """The query state was entered with malformed oracle tapes."""


class UnknownProgram(FittmError, KeyError):
    pass


class ParseError(FittmError):
    """Assembly error anchored at a line (1-based)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class UnknownState(ParseError):
    pass


class DuplicateTransition(ParseError):
    def __init__(self, message: str, line: int, first_line: int):
        self.first_line = first_line
        super().__init__(f"{message} (first defined on line {first_line})", line)


class NonTotal(ParseError):
    pass


class BadTuple(ParseError):
    pass


class DisciplineViolation(FittmError):
    """An oracle call broke the discipline of the variant being run.

    ``tree`` holds the subcomputation tree at the point of the violation so
    traces can still be exported.
    """

    def __init__(self, message: str, tree=None):
        super().__init__(message)
        self.tree = tree


class OrdinalViolation(DisciplineViolation):
    pass


class DepthViolation(DisciplineViolation):
    pass


class NotCertifiedDivergent(FittmError):
    pass


class IterationBudgetExceeded(FittmError):
    pass
